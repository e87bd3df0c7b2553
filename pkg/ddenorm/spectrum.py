"""
Characteristic roots of a linearized DDE

Chebyshev collocation of the infinitesimal generator gives approximate
roots; Newton on the bordered system [Delta(lambda) q = 0, c.q = 1] refines
them and the eigenvectors are normalized by p Delta'(lambda) q = 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import linalg

from ddenorm.charlin import CharLinearization, ExpPoly
from ddenorm.errors import DefectiveEigenvalue, InvalidInput, NoConvergence

logger = logging.getLogger(__name__)

DEFAULT_BORDER_SEED = 20240607
REAL_TOL = 1e-10


@dataclass(frozen=True)
class Eigenpair:
    """Simple characteristic root with right/left null vectors of Delta(lam)"""

    lam: complex
    q: np.ndarray
    p: np.ndarray
    normalized: bool = True
    conjugate: bool = False

    @property
    def omega(self) -> float:
        return float(self.lam.imag)

    @property
    def is_real(self) -> bool:
        return self.lam.imag == 0.0

    def conj(self) -> "Eigenpair":
        return Eigenpair(self.lam.conjugate(), self.q.conj(), self.p.conj(), self.normalized, self.conjugate)

    def phi(self, span: float = np.inf) -> ExpPoly:
        """Eigenfunction theta -> exp(lam theta) q"""
        return ExpPoly.term(self.lam, self.q, span=span)

    def rephased(self, angle: float) -> "Eigenpair":
        """q <- exp(i angle) q with p rescaled to keep p Delta' q = 1"""
        rot = np.exp(1j * angle)
        return Eigenpair(self.lam, rot * self.q, self.p / rot, self.normalized, self.conjugate)

    def flipped(self) -> "Eigenpair":
        return Eigenpair(self.lam, -self.q, -self.p, self.normalized, self.conjugate)


def _cheb(N: int):
    """Chebyshev points and differentiation matrix on [-1, 1]"""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D = D - np.diag(D.sum(axis=1))
    return x, D


def _lagrange_row(nodes: np.ndarray, t: float) -> np.ndarray:
    """Barycentric Lagrange basis values at t for Chebyshev nodes"""
    N = nodes.size - 1
    w = (-1.0) ** np.arange(N + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    diff = t - nodes
    hit = np.abs(diff) <= 1e-14 * max(1.0, np.abs(nodes).max())
    if np.any(hit):
        row = np.zeros(N + 1)
        row[np.argmax(hit)] = 1.0
        return row
    terms = w / diff
    return terms / terms.sum()


def default_collocation(lin: CharLinearization) -> int:
    norm = max(np.linalg.norm(M, 2) for M in lin.mats)
    return max(20, int(math.ceil(10 + 2 * lin.tau_max * norm)))


def spectrum_approx(lin: CharLinearization, N: Optional[int] = None) -> List[complex]:
    """Eigenvalues of the collocated generator, sorted by descending real part"""
    if N is None:
        N = default_collocation(lin)
    if N < 5:
        raise InvalidInput("collocation size must be at least 5", {"N": N})
    n = lin.n
    if lin.m == 0:
        values = linalg.eigvals(lin.mats[0])
    else:
        x, D = _cheb(N)
        nodes = lin.tau_max * (x - 1.0) / 2.0
        A = np.kron(D * (2.0 / lin.tau_max), np.eye(n))
        first = np.zeros((n, n * (N + 1)))
        for tau, M in zip(lin.taus, lin.mats):
            row = _lagrange_row(nodes, -tau)
            first += np.kron(row[None, :], M)
        A[:n, :] = first
        values = linalg.eigvals(A)
    values = np.asarray(values, dtype=complex)
    order = np.argsort(-values.real, kind="stable")
    return [complex(v) for v in values[order]]


def _border(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def refine_eigenpair(
    lin: CharLinearization,
    lam0: complex,
    seed: int = DEFAULT_BORDER_SEED,
    maxiter: int = 20,
    tol: float = 1e-12,
) -> Eigenpair:
    """
    Newton refinement of a simple characteristic root near lam0

    Args:
        lin: linearization
        lam0: initial guess
        seed: seed of the random border vector c
        maxiter: Newton iteration cap

    Returns:
        Normalized Eigenpair (unit q, largest entry of q real positive,
        p Delta'(lam) q = 1)
    """
    n = lin.n
    c = _border(n, seed)
    lam = complex(lam0)
    _, _, vh = linalg.svd(lin.delta(lam))
    q = vh[-1].conj()
    q = q / (c @ q)
    converged = False
    for it in range(maxiter):
        D = lin.delta(lam)
        F = np.concatenate([D @ q, [c @ q - 1.0]])
        J = np.zeros((n + 1, n + 1), dtype=complex)
        J[:n, :n] = D
        J[:n, n] = lin.delta_deriv(lam, 1) @ q
        J[n, :n] = c
        step = linalg.solve(J, -F)
        q = q + step[:n]
        lam = lam + step[n]
        logger.debug("eigen newton %d: |dlam| = %.3e", it, abs(step[n]))
        small_step = abs(step[n]) <= tol * max(1.0, abs(lam)) and np.linalg.norm(step[:n]) <= 1e-10 * np.linalg.norm(q)
        if small_step or np.linalg.norm(F) <= 1e-15 * (1.0 + np.linalg.norm(D)) * np.linalg.norm(q):
            converged = True
            break
    if not converged:
        raise NoConvergence("eigenvalue refinement did not converge", {"lam0": lam0, "lam": lam})
    return normalize_eigenpair(lin, lam, q, seed=seed)


def normalize_eigenpair(lin: CharLinearization, lam: complex, q: np.ndarray,
                        seed: int = DEFAULT_BORDER_SEED) -> Eigenpair:
    """Left vector by a bordered solve on Delta^T, then scaling and phase"""
    n = lin.n
    real_root = abs(lam.imag) <= REAL_TOL * max(1.0, abs(lam))
    if real_root:
        lam = complex(lam.real, 0.0)
    q = np.asarray(q, dtype=complex)
    q = q / np.linalg.norm(q)
    k = int(np.argmax(np.abs(q)))
    q = q * (np.conj(q[k]) / abs(q[k]))
    if real_root:
        q = q.real.astype(complex)
        q = q / np.linalg.norm(q)
    c = _border(n, seed + 1)
    bordered = np.zeros((n + 1, n + 1), dtype=complex)
    bordered[:n, :n] = lin.delta(lam).T
    bordered[:n, n] = c
    bordered[n, :n] = c
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[n] = 1.0
    p = linalg.solve(bordered, rhs)[:n]
    if real_root:
        p = (p / p[np.argmax(np.abs(p))]).real.astype(complex)
    d1 = lin.delta_deriv(lam, 1)
    kappa = p @ d1 @ q
    scale = np.linalg.norm(p) * np.linalg.norm(d1, 2) * np.linalg.norm(q)
    if abs(kappa) < 1e-10 * scale:
        raise DefectiveEigenvalue("p Delta'(lam) q vanishes", {"lam": lam, "kappa": abs(kappa)})
    p = p / kappa
    return Eigenpair(lam, q, p, normalized=True, conjugate=not real_root)


def rightmost(lin: CharLinearization, k: int = 4, N: Optional[int] = None,
              seed: int = DEFAULT_BORDER_SEED) -> List[Eigenpair]:
    """
    The k rightmost distinct roots, conjugate pairs reported once (Im > 0)
    """
    if k < 1:
        raise InvalidInput("k must be positive", {"k": k})
    approx = spectrum_approx(lin, N)
    found: List[Eigenpair] = []
    for guess in approx:
        if len(found) >= k:
            break
        if guess.imag < -1e-8 * max(1.0, abs(guess)):
            continue
        pair = refine_eigenpair(lin, guess, seed=seed)
        if pair.lam.imag < 0:
            pair = pair.conj()
        if any(abs(pair.lam - other.lam) <= 1e-6 * max(1.0, abs(pair.lam)) for other in found):
            continue
        found.append(pair)
    found.sort(key=lambda e: (-e.lam.real, -e.lam.imag))
    return found


def det_residual(lin: CharLinearization, lam: complex) -> float:
    """|det Delta(lam)| scaled by the product of row norms"""
    D = lin.delta(lam)
    rows = np.prod(np.maximum(np.linalg.norm(D, axis=1), np.finfo(float).tiny))
    return float(abs(np.linalg.det(D)) / rows)
