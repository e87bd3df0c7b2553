"""
Characteristic matrix of a linearized discrete-delay system

Delta(z) = zI - sum_j M_j exp(-z tau_j), its analytic z-derivatives, the
bordered solver used at simple eigenvalues, and the exponential-polynomial
function algebra (ExpPoly) in which all center-manifold coefficient
functions H(theta) on [-tau_m, 0] are represented.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from ddenorm.errors import (
    InconsistentSystem,
    InvalidInput,
    NearSingularResolvent,
    SingularBorder,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Iterable[complex]]

# Exponents closer than this (relative) are treated as equal
EXPONENT_TOL = 1e-12
# Series switch for the exponential moments used by the pairing
_SERIES_SWITCH = 0.1


@dataclass(frozen=True)
class CharLinearization:
    """Discrete kernel (tau_j, M_j) of a linearized DDE"""

    taus: np.ndarray
    mats: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float).ravel()
        mats = np.asarray(self.mats, dtype=float)
        if mats.ndim == 2:
            mats = mats[None, :, :]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise InvalidInput("matrices M_j must be square", {"shape": mats.shape})
        if mats.shape[0] != taus.size:
            raise InvalidInput(
                "one matrix per delay expected",
                {"delays": taus.size, "matrices": mats.shape[0]},
            )
        if taus[0] != 0.0 or np.any(np.diff(taus) <= 0) or not np.all(np.isfinite(taus)):
            raise InvalidInput("delays must start at 0 and increase strictly", {"taus": taus})
        if not np.all(np.isfinite(mats)):
            raise InvalidInput("non-finite entries in M_j")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "mats", mats)

    @property
    def n(self) -> int:
        return self.mats.shape[1]

    @property
    def m(self) -> int:
        return self.taus.size - 1

    @property
    def tau_max(self) -> float:
        return float(self.taus[-1])

    def delta(self, z: complex) -> np.ndarray:
        weights = np.exp(-z * self.taus)
        return z * np.eye(self.n) - np.tensordot(weights, self.mats, axes=1)

    def delta_deriv(self, z: complex, k: int) -> np.ndarray:
        if k == 1:
            weights = self.taus * np.exp(-z * self.taus)
            return np.eye(self.n) + np.tensordot(weights, self.mats, axes=1)
        if k == 2:
            weights = self.taus ** 2 * np.exp(-z * self.taus)
            return -np.tensordot(weights, self.mats.astype(complex), axes=1)
        raise InvalidInput("derivative order must be 1 or 2", {"k": k})

    def lag_apply(self, samples: np.ndarray) -> np.ndarray:
        """sum_j M_j v(-tau_j) for lag samples given column-wise"""
        return np.einsum("jab,bj->a", self.mats, samples)


def delta(lin: CharLinearization, z: complex) -> np.ndarray:
    return lin.delta(z)


def delta_deriv(lin: CharLinearization, z: complex, k: int) -> np.ndarray:
    return lin.delta_deriv(z, k)


@dataclass(frozen=True)
class ExpPoly:
    """
    theta -> sum_k exp(z_k theta) (a_k + theta b_k) on [-span, 0]

    ``head`` is the v0 component paired with the function; for every element
    produced by the solvers below it equals the value at theta = 0.
    """

    exponents: np.ndarray
    coeffs: np.ndarray
    slopes: np.ndarray
    span: float = np.inf

    # numpy scalars defer to __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        exps = np.asarray(self.exponents, dtype=complex).ravel()
        a = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        b = np.atleast_2d(np.asarray(self.slopes, dtype=complex))
        if a.shape != b.shape or a.shape[0] != exps.size:
            raise InvalidInput("inconsistent ExpPoly term arrays", {"a": a.shape, "b": b.shape})
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "slopes", b)

    # Construction

    @classmethod
    def zero(cls, n: int, span: float = np.inf) -> "ExpPoly":
        return cls(np.zeros(0, complex), np.zeros((0, n), complex), np.zeros((0, n), complex), span)

    @classmethod
    def term(cls, z: complex, a: ArrayLike, b: Optional[ArrayLike] = None, span: float = np.inf) -> "ExpPoly":
        a = np.asarray(a, dtype=complex).ravel()
        b = np.zeros_like(a) if b is None else np.asarray(b, dtype=complex).ravel()
        return cls(np.array([z], complex), a[None, :], b[None, :], span)

    @classmethod
    def constant(cls, a: ArrayLike, span: float = np.inf) -> "ExpPoly":
        return cls.term(0.0, a, span=span)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def head(self) -> np.ndarray:
        return self.coeffs.sum(axis=0)

    # Algebra

    def merged(self) -> "ExpPoly":
        exps, a, b = [], [], []
        for z, ak, bk in zip(self.exponents, self.coeffs, self.slopes):
            for i, zi in enumerate(exps):
                if abs(zi - z) <= EXPONENT_TOL * max(1.0, abs(z)):
                    a[i] = a[i] + ak
                    b[i] = b[i] + bk
                    break
            else:
                exps.append(z)
                a.append(ak.copy())
                b.append(bk.copy())
        if not exps:
            return ExpPoly.zero(self.n, self.span)
        return ExpPoly(np.array(exps), np.array(a), np.array(b), self.span)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return ExpPoly(
            np.concatenate([self.exponents, other.exponents]),
            np.vstack([self.coeffs, other.coeffs]),
            np.vstack([self.slopes, other.slopes]),
            min(self.span, other.span),
        ).merged()

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.exponents, -self.coeffs, -self.slopes, self.span)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "ExpPoly":
        scalar = complex(scalar)
        return ExpPoly(self.exponents, scalar * self.coeffs, scalar * self.slopes, self.span)

    __rmul__ = __mul__

    def conj(self) -> "ExpPoly":
        return ExpPoly(self.exponents.conj(), self.coeffs.conj(), self.slopes.conj(), self.span)

    def real(self) -> "ExpPoly":
        """Re part as a function: (h + conj(h)) / 2"""
        return 0.5 * (self + self.conj())

    # Evaluation

    def _check_domain(self, theta: np.ndarray):
        tol = 1e-12 * max(1.0, self.span if np.isfinite(self.span) else 1.0)
        if np.any(theta > tol) or np.any(theta < -self.span - tol):
            raise InvalidInput("theta outside [-span, 0]", {"span": self.span})

    def __call__(self, theta) -> np.ndarray:
        theta_arr = np.asarray(theta, dtype=float)
        self._check_domain(theta_arr)
        th = np.atleast_1d(theta_arr)
        e = np.exp(np.outer(th, self.exponents))
        values = e @ self.coeffs + (e * th[:, None]) @ self.slopes
        return values[0] if theta_arr.ndim == 0 else values

    def derivative(self, theta) -> np.ndarray:
        theta_arr = np.asarray(theta, dtype=float)
        self._check_domain(theta_arr)
        th = np.atleast_1d(theta_arr)
        e = np.exp(np.outer(th, self.exponents))
        z = self.exponents[None, :]
        values = (e * z) @ self.coeffs + (e * (1.0 + z * th[:, None])) @ self.slopes
        return values[0] if theta_arr.ndim == 0 else values

    def lag_samples(self, taus: np.ndarray) -> np.ndarray:
        """Columns v(-tau_0), ..., v(-tau_m)"""
        return self(-np.asarray(taus, dtype=float)).T


def exppoly_eval(h: ExpPoly, theta) -> np.ndarray:
    return h(theta)


def exppoly_lag_samples(h: ExpPoly, lin: CharLinearization) -> np.ndarray:
    return h.lag_samples(lin.taus)


# Linear solves

def solve_bordered(
    M: np.ndarray,
    q: np.ndarray,
    p: np.ndarray,
    y: np.ndarray,
    tol: float = 1e-8,
    cond_max: float = 1e14,
) -> np.ndarray:
    """
    Solve Mx = y with p.x = 0 for singular M with null pair (q, p).

    Args:
        M: singular n x n matrix
        q: right null vector
        p: left null vector (row)
        y: right-hand side, expected in the range of M

    Returns:
        The particular solution x orthogonal to p
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    y = np.asarray(y, dtype=complex).ravel()
    bordered = np.zeros((n + 1, n + 1), dtype=complex)
    bordered[:n, :n] = M
    bordered[:n, n] = q
    bordered[n, :n] = p
    cond = np.linalg.cond(bordered)
    if not np.isfinite(cond) or cond > cond_max:
        raise SingularBorder("bordered matrix is numerically singular", {"cond": cond})
    sol = linalg.solve(bordered, np.concatenate([y, [0.0]]))
    slack = sol[n]
    if abs(slack) > tol * max(np.linalg.norm(y), np.finfo(float).tiny):
        raise InconsistentSystem(
            "right-hand side is not in the range of M",
            {"slack": abs(slack), "rhs_norm": float(np.linalg.norm(y))},
        )
    return sol[:n]


def _resolvent_guard(lin: CharLinearization, D: np.ndarray, z: complex, guard: float):
    """det Delta(z) relative to the size of its terms |z| and |M_j exp(-z tau_j)|"""
    n = D.shape[0]
    scale = abs(z) + sum(np.linalg.norm(M, 2) * abs(np.exp(-z * tau)) for tau, M in zip(lin.taus, lin.mats))
    det = abs(np.linalg.det(D))
    if scale == 0.0 or det / scale ** n < guard:
        raise NearSingularResolvent(
            "z is too close to a characteristic root",
            {"z": z, "abs_det": det, "scaled_det": det / scale ** n if scale else 0.0},
        )


def _particular(z: complex, w: ExpPoly) -> ExpPoly:
    """Particular solution of z v - v' = w, term by term"""
    exps, a, b = [], [], []
    for zk, ak, bk in zip(w.exponents, w.coeffs, w.slopes):
        gap = z - zk
        if abs(gap) <= EXPONENT_TOL * max(1.0, abs(z)):
            if np.any(bk != 0):
                raise InvalidInput("resonant right-hand side term of degree one is not supported")
            exps.append(z)
            a.append(np.zeros_like(ak))
            b.append(-ak)
        else:
            beta = bk / gap
            exps.append(zk)
            a.append((ak + beta) / gap)
            b.append(beta)
    if not exps:
        return ExpPoly.zero(w.n, w.span)
    return ExpPoly(np.array(exps), np.array(a), np.array(b), w.span)


def resolvent_solve(
    lin: CharLinearization,
    z: complex,
    w0: np.ndarray,
    w: Optional[ExpPoly] = None,
    guard: float = 1e-10,
) -> ExpPoly:
    """
    Solve (zI - A*)(v0, v) = (w0, w) for z off the spectrum.

    For w = exp(z theta) a this is the closed form
    v = Delta(z)^-1 (exp(z theta) w0 + (Delta'(z) - I - theta Delta(z)) w(theta)).
    Other exponents in w are handled term by term.
    """
    D = lin.delta(z)
    _resolvent_guard(lin, D, z, guard)
    w0 = np.asarray(w0, dtype=complex).ravel()
    if w is None:
        c = linalg.solve(D, w0)
        return ExpPoly.term(z, c, span=lin.tau_max)
    vp = _particular(z, w)
    samples = vp.lag_samples(lin.taus)
    y = w0 - z * samples[:, 0] + lin.lag_apply(samples)
    c = linalg.solve(D, y)
    v = vp + ExpPoly.term(z, c, span=lin.tau_max)
    return ExpPoly(v.exponents, v.coeffs, v.slopes, lin.tau_max)


def binv(
    lin: CharLinearization,
    lam: complex,
    q: np.ndarray,
    p: np.ndarray,
    eta: np.ndarray,
    kappa: complex,
    tol: float = 1e-8,
) -> ExpPoly:
    """
    Solve (lam I - A*)(v0, v) = (eta, 0) + kappa (q, phi) at a simple eigenvalue.

    The solution is normalized by <phi_sun, v> = 0.
    """
    eta = np.asarray(eta, dtype=complex).ravel()
    d1 = lin.delta_deriv(lam, 1)
    y = eta + kappa * (d1 @ q)
    scale = max(np.linalg.norm(eta), abs(kappa) * np.linalg.norm(d1 @ q), np.finfo(float).tiny)
    fsc = abs(p @ y)
    if fsc > tol * scale:
        raise InconsistentSystem(
            "Fredholm solvability condition violated",
            {"residual": fsc, "rhs_norm": scale, "eigenvalue": lam},
        )
    xi = solve_bordered(lin.delta(lam), q, p, y, tol=max(tol, 1e-8))
    gamma = -(p @ d1 @ xi) + 0.5 * kappa * (p @ lin.delta_deriv(lam, 2) @ q)
    v0 = xi + gamma * q
    return ExpPoly.term(lam, v0, -kappa * np.asarray(q, dtype=complex), span=lin.tau_max)


# Pairing with the adjoint eigenvector

def _exp_moments(mu: complex, tau: float) -> Tuple[complex, complex]:
    """Integrals of exp(mu s) and s exp(mu s) over [-tau, 0]"""
    x = mu * tau
    if abs(x) < _SERIES_SWITCH:
        i0 = 0.0j
        i1 = 0.0j
        term = 1.0 + 0.0j  # mu^k / k!
        for k in range(25):
            i0 += -term * (-tau) ** (k + 1) / (k + 1)
            i1 += -term * (-tau) ** (k + 2) / (k + 2)
            term = term * mu / (k + 1)
        return i0, i1
    em = np.exp(-x)
    i0 = -np.expm1(-x) / mu
    i1 = (em * (1.0 + x) - 1.0) / mu ** 2
    return i0, i1


def pairing(lin: CharLinearization, lam: complex, p: np.ndarray, v: ExpPoly) -> complex:
    """<phi_sun, v> for the adjoint eigenvector belonging to (lam, p)"""
    total = p @ v(0.0)
    for tau, M in zip(lin.taus[1:], lin.mats[1:]):
        acc = np.zeros(lin.n, dtype=complex)
        for z, a, b in zip(v.exponents, v.coeffs, v.slopes):
            i0, i1 = _exp_moments(z - lam, tau)
            acc += i0 * a + i1 * b
        total += np.exp(-lam * tau) * (p @ M @ acc)
    return complex(total)


def resolvent_residuals(
    lin: CharLinearization,
    z: complex,
    v: ExpPoly,
    w0: np.ndarray,
    w: Optional[ExpPoly] = None,
    n_samples: int = 20,
) -> Tuple[float, float]:
    """Relative interior and boundary residuals of a solved resolvent equation"""
    thetas = -np.linspace(0.0, lin.tau_max, n_samples)
    lhs = z * v(thetas) - v.derivative(thetas)
    rhs = w(thetas) if w is not None else np.zeros_like(lhs)
    scale = max(np.abs(lhs).max(), np.abs(rhs).max(), np.finfo(float).tiny)
    interior = float(np.abs(lhs - rhs).max() / scale)
    samples = v.lag_samples(lin.taus)
    w0 = np.asarray(w0, dtype=complex).ravel()
    boundary_lhs = z * v.head - lin.lag_apply(samples)
    bscale = max(np.linalg.norm(boundary_lhs), np.linalg.norm(w0), np.finfo(float).tiny)
    boundary = float(np.linalg.norm(boundary_lhs - w0) / bscale)
    return interior, boundary
