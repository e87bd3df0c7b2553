"""
Newton correction of equilibria, fold, Hopf and codimension-two points

All defining systems share one layout: the state x, the free parameters,
then one block per critical eigenvalue (a real null vector at lambda = 0, or
omega with the real and imaginary parts of a complex null vector at
i omega), each closed by a random border c.q = 1.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ddenorm import nmfm
from ddenorm.errors import (
    AmbiguousPattern,
    ImaginaryAxisLost,
    InvalidInput,
    NoConvergence,
    ResonanceDetected,
    SingularBorder,
)
from ddenorm.model import DelayModel, eval_rhs, linearize, make_bundle
from ddenorm.spectrum import DEFAULT_BORDER_SEED, Eigenpair, normalize_eigenpair, rightmost

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
RESONANCE_TOL = 1e-4
KINDS = ("genh", "zeho", "hoho", "thopf")


@dataclass(frozen=True)
class Equilibrium:
    x: np.ndarray
    alpha: np.ndarray
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class HopfPoint:
    equilibrium: Equilibrium
    omega: float
    eigenpair: Eigenpair
    free_param: Optional[int] = None
    iterations: int = 0
    l1: Optional[float] = None


@dataclass(frozen=True)
class FoldPoint:
    equilibrium: Equilibrium
    eigenpair: Eigenpair
    free_param: Optional[int] = None
    iterations: int = 0


@dataclass
class CodimTwoPoint:
    """Equilibrium with a codimension-two critical spectrum"""

    kind: str
    equilibrium: Equilibrium
    eigenpairs: Tuple[Eigenpair, ...]
    unfolding: Tuple[int, int]
    l1: Optional[float] = None
    data: Any = None
    spectrum: List[complex] = field(default_factory=list)

    @property
    def omegas(self) -> Tuple[float, ...]:
        return tuple(e.omega for e in self.eigenpairs if not e.is_real)


# Newton machinery

def fd_jacobian(fun: Callable[[np.ndarray], np.ndarray], y: np.ndarray, rel_step: float = 1e-7) -> np.ndarray:
    f0 = fun(y)
    J = np.zeros((f0.size, y.size))
    for k in range(y.size):
        h = rel_step * max(1.0, abs(y[k]))
        e = np.zeros_like(y)
        e[k] = h
        J[:, k] = (fun(y + e) - fun(y - e)) / (2 * h)
    return J


def newton(
    fun: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    tol: float = NEWTON_TOL,
    maxiter: int = 30,
    scale: Optional[Callable[[np.ndarray], float]] = None,
    damped: bool = False,
) -> Tuple[np.ndarray, int]:
    """
    Newton iteration with a central-difference Jacobian

    Returns:
        (solution, number of Newton steps taken)
    """
    y = np.asarray(y0, dtype=float).copy()
    scale = scale or (lambda v: 1.0 + np.linalg.norm(v))
    g = fun(y)
    for it in range(maxiter + 1):
        norm = np.linalg.norm(g)
        if norm <= tol * scale(y):
            return y, it
        if it == maxiter:
            break
        J = fd_jacobian(fun, y)
        try:
            if J.shape[0] == J.shape[1]:
                step = linalg.solve(J, -g)
            else:
                step = linalg.lstsq(J, -g)[0]
        except linalg.LinAlgError as exc:
            raise SingularBorder("singular Newton matrix", {"iteration": it}) from exc
        t = 1.0
        while True:
            trial = y + t * step
            g_trial = fun(trial)
            if not damped or np.linalg.norm(g_trial) <= (1 - 1e-4 * t) * norm or t <= 1e-6:
                break
            t *= 0.5
        y, g = trial, g_trial
        logger.debug("newton %d: |g| = %.3e, damping %.3g", it, np.linalg.norm(g), t)
    raise NoConvergence("Newton iteration did not converge", {"residual": float(np.linalg.norm(g)), "maxiter": maxiter})


class DefiningSystem:
    """
    Residual of f(x, alpha) = 0 plus critical-eigenvalue blocks

    blocks: sequence of "zero" (Delta(0) q = 0, q real) and "imag"
    (Delta(i omega) q = 0, q complex) entries.
    pin: for equilibria that exist for all parameters, x = pin replaces
    f(x, alpha) = 0.
    """

    def __init__(self, model: DelayModel, alpha0: np.ndarray, free: Sequence[int],
                 blocks: Sequence[str] = (), seed: int = DEFAULT_BORDER_SEED,
                 pin: Optional[np.ndarray] = None):
        self.model = model
        self.pin = None if pin is None else np.asarray(pin, dtype=float).copy()
        self.alpha0 = np.asarray(alpha0, dtype=float).copy()
        self.free = tuple(int(k) for k in free)
        self.blocks = tuple(blocks)
        rng = np.random.default_rng(seed)
        self.borders = []
        for b in self.blocks:
            if b == "zero":
                self.borders.append(rng.standard_normal(model.n))
            elif b == "imag":
                self.borders.append(rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n))
            else:
                raise InvalidInput(f"unknown eigen block '{b}'")
        n = model.n
        self.size = n + len(self.free) + sum(n if b == "zero" else 2 * n + 1 for b in self.blocks)

    @property
    def n(self) -> int:
        return self.model.n

    def alpha(self, y: np.ndarray) -> np.ndarray:
        a = self.alpha0.copy()
        a[list(self.free)] = y[self.n:self.n + len(self.free)]
        return a

    def x(self, y: np.ndarray) -> np.ndarray:
        return y[:self.n]

    def eigen(self, y: np.ndarray) -> List[Tuple[complex, np.ndarray]]:
        """(lambda, q) per block"""
        n = self.n
        pos = n + len(self.free)
        out = []
        for b in self.blocks:
            if b == "zero":
                out.append((0.0 + 0.0j, y[pos:pos + n].astype(complex)))
                pos += n
            else:
                omega = y[pos]
                q = y[pos + 1:pos + 1 + n] + 1j * y[pos + 1 + n:pos + 1 + 2 * n]
                out.append((1j * omega, q))
                pos += 2 * n + 1
        return out

    def pack(self, x: np.ndarray, alpha: np.ndarray, eigen: Sequence[Tuple[complex, np.ndarray]] = ()) -> np.ndarray:
        parts = [np.asarray(x, dtype=float).ravel(), np.asarray(alpha, dtype=float)[list(self.free)]]
        for b, c, (lam, q) in zip(self.blocks, self.borders, eigen):
            q = np.asarray(q, dtype=complex)
            q = q / (c @ q)
            if b == "zero":
                parts.append(q.real)
            else:
                parts.append(np.array([lam.imag]))
                parts.append(q.real)
                parts.append(q.imag)
        return np.concatenate(parts)

    def residual(self, y: np.ndarray) -> np.ndarray:
        x = self.x(y)
        alpha = self.alpha(y)
        if self.pin is not None:
            parts = [x - self.pin]
        else:
            parts = [eval_rhs(self.model, self.model.samples(x, alpha), alpha)]
        if self.blocks:
            lin = linearize(self.model, x, alpha)
            for b, c, (lam, q) in zip(self.blocks, self.borders, self.eigen(y)):
                r = lin.delta(lam) @ q
                border = c @ q - 1.0
                if b == "zero":
                    parts.extend([r.real, [border.real]])
                else:
                    parts.extend([r.real, r.imag, [border.real, border.imag]])
        return np.concatenate(parts)

    def scale(self, y: np.ndarray) -> float:
        return 1.0 + np.linalg.norm(self.x(y))

    def solve(self, y0: np.ndarray, tol: float = NEWTON_TOL, maxiter: int = 30) -> Tuple[np.ndarray, int]:
        return newton(self.residual, y0, tol=tol, maxiter=maxiter, scale=self.scale)


def _solve_with_redraw(build: Callable[[int], Tuple[DefiningSystem, np.ndarray]], seed: int, **kwargs):
    try:
        system, y0 = build(seed)
        return (system, *system.solve(y0, **kwargs))
    except SingularBorder:
        logger.info("singular border, redrawing with seed %d", seed + 1)
        system, y0 = build(seed + 1)
        return (system, *system.solve(y0, **kwargs))


# Equilibria

def correct_equilibrium(model: DelayModel, alpha: Sequence[float], x0: Sequence[float],
                        tol: float = NEWTON_TOL, maxiter: int = 50) -> Equilibrium:
    """Damped Newton on x -> f(x, ..., x, alpha) with Armijo backtracking"""
    alpha = np.asarray(alpha, dtype=float)
    system = DefiningSystem(model, alpha, ())
    y, iterations = newton(system.residual, np.asarray(x0, dtype=float), tol=tol, maxiter=maxiter,
                           scale=system.scale, damped=True)
    residual = float(np.linalg.norm(system.residual(y)))
    logger.info("equilibrium corrected in %d steps, residual %.2e", iterations, residual)
    return Equilibrium(y, alpha, residual, iterations)


def _critical(eigs: Sequence[Eigenpair], real: bool, target: Optional[complex] = None) -> Eigenpair:
    pool = [e for e in eigs if e.is_real == real and (real or e.lam.imag > 0)]
    if not pool:
        raise InvalidInput("no eigenvalue of the requested type in the rightmost spectrum")
    if target is not None:
        return min(pool, key=lambda e: abs(e.lam - target))
    return min(pool, key=lambda e: abs(e.lam.real) if not real else abs(e.lam))


def hopf_from_equilibrium(model: DelayModel, eq: Equilibrium, omega: Optional[float] = None,
                          k: int = 6, N: Optional[int] = None) -> HopfPoint:
    lin = linearize(model, eq.x, eq.alpha)
    pair = _critical(rightmost(lin, k, N), real=False, target=None if omega is None else 1j * omega)
    return HopfPoint(eq, pair.omega, pair)


def fold_from_equilibrium(model: DelayModel, eq: Equilibrium, k: int = 6, N: Optional[int] = None) -> FoldPoint:
    lin = linearize(model, eq.x, eq.alpha)
    return FoldPoint(eq, _critical(rightmost(lin, k, N), real=True))


def correct_hopf(model: DelayModel, guess: HopfPoint, free_param: int,
                 seed: int = DEFAULT_BORDER_SEED, tol: float = NEWTON_TOL) -> HopfPoint:
    """Newton on (x, free parameter, omega, Re q, Im q)"""
    eq = guess.equilibrium

    def build(s):
        system = DefiningSystem(model, eq.alpha, (free_param,), ("imag",), seed=s)
        return system, system.pack(eq.x, eq.alpha, [(1j * guess.omega, guess.eigenpair.q)])

    system, y, iterations = _solve_with_redraw(build, seed, tol=tol)
    (lam, q), = system.eigen(y)
    if lam.imag <= 0:
        raise ImaginaryAxisLost("Hopf frequency drifted to a non-positive value", {"omega": lam.imag})
    x, alpha = system.x(y), system.alpha(y)
    lin = linearize(model, x, alpha)
    pair = normalize_eigenpair(lin, lam, q)
    residual = float(np.linalg.norm(system.residual(y)))
    logger.info("Hopf point corrected in %d steps: omega = %.6g", iterations, lam.imag)
    return HopfPoint(Equilibrium(x.copy(), alpha, residual, iterations), lam.imag, pair, free_param, iterations)


def correct_fold(model: DelayModel, guess: FoldPoint, free_param: int,
                 seed: int = DEFAULT_BORDER_SEED, tol: float = NEWTON_TOL) -> FoldPoint:
    """Newton on (x, free parameter, q) with Delta(0) q = 0"""
    eq = guess.equilibrium

    def build(s):
        system = DefiningSystem(model, eq.alpha, (free_param,), ("zero",), seed=s)
        return system, system.pack(eq.x, eq.alpha, [(0.0, guess.eigenpair.q)])

    system, y, iterations = _solve_with_redraw(build, seed, tol=tol)
    (lam, q), = system.eigen(y)
    x, alpha = system.x(y), system.alpha(y)
    pair = normalize_eigenpair(linearize(model, x, alpha), 0.0 + 0.0j, q)
    residual = float(np.linalg.norm(system.residual(y)))
    return FoldPoint(Equilibrium(x.copy(), alpha, residual, iterations), pair, free_param, iterations)


# Codimension two

def check_unfolding(model: DelayModel, unfolding: Sequence[int]) -> Tuple[int, int]:
    unfolding = tuple(int(k) for k in unfolding)
    if len(unfolding) != 2 or unfolding[0] == unfolding[1]:
        raise InvalidInput("exactly two distinct unfolding parameters are required", {"unfolding": unfolding})
    for k in unfolding:
        if not 0 <= k < model.p:
            raise InvalidInput("unfolding parameter index out of range", {"index": k})
        if k in model.delay_parameters and not model.time_rescaled:
            raise InvalidInput(
                "a delay cannot be an unfolding parameter unless the model is time rescaled",
                {"parameter": model.parameter_names[k]},
            )
    return unfolding


def check_nonresonance(omega1: float, omega2: float, order: int = 5, tol: float = RESONANCE_TOL):
    for k in range(1, order):
        for l in range(1, order - k + 1):
            if abs(k * omega1 - l * omega2) <= tol * max(k * omega1, l * omega2):
                raise ResonanceDetected(
                    f"{k}:{l} resonance between the imaginary pairs",
                    {"omega1": omega1, "omega2": omega2, "k": k, "l": l},
                )


def correct_codim2(model: DelayModel, point: Union[Equilibrium, CodimTwoPoint], kind: str,
                   unfolding: Sequence[int], omegas: Optional[Sequence[float]] = None,
                   N: Optional[int] = None, seed: int = DEFAULT_BORDER_SEED,
                   tol: float = NEWTON_TOL) -> CodimTwoPoint:
    """
    Newton correction of a zero-Hopf or double-Hopf point in two parameters
    """
    unfolding = check_unfolding(model, unfolding)
    eq = point.equilibrium if isinstance(point, CodimTwoPoint) else point
    lin = linearize(model, eq.x, eq.alpha)
    eigs = rightmost(lin, 6, N)
    if kind in ("zeho", "thopf"):
        blocks = ("zero", "imag")
        target = None if not omegas else 1j * omegas[0]
        guesses = [_critical(eigs, real=True), _critical(eigs, real=False, target=target)]
    elif kind == "hoho":
        blocks = ("imag", "imag")
        pool = sorted((e for e in eigs if not e.is_real and e.lam.imag > 0), key=lambda e: abs(e.lam.real))
        if len(pool) < 2:
            raise AmbiguousPattern("fewer than two complex pairs near the imaginary axis",
                                   {"spectrum": [complex(e.lam) for e in eigs]})
        if omegas:
            guesses = [min(pool, key=lambda e: abs(e.lam - 1j * w)) for w in omegas]
            if len(guesses) == 1:
                guesses.append(next(e for e in pool if e is not guesses[0]))
        else:
            guesses = pool[:2]
        if len(guesses) < 2 or guesses[0] is guesses[1]:
            raise AmbiguousPattern("the target frequencies do not select two distinct pairs",
                                   {"omegas": list(omegas or []), "spectrum": [complex(e.lam) for e in eigs]})
    else:
        raise InvalidInput(f"no codimension-two corrector for kind '{kind}'")

    def build(s):
        pin = eq.x if kind == "thopf" else None
        system = DefiningSystem(model, eq.alpha, unfolding, blocks, seed=s, pin=pin)
        return system, system.pack(eq.x, eq.alpha, [(0j if b == "zero" else 1j * g.omega, g.q)
                                                     for b, g in zip(blocks, guesses)])

    system, y, iterations = _solve_with_redraw(build, seed, tol=tol)
    x, alpha = system.x(y), system.alpha(y)
    lin = linearize(model, x, alpha)
    pairs = []
    for lam, q in system.eigen(y):
        if lam.imag < 0:
            lam, q = lam.conjugate(), q.conj()
        pairs.append(normalize_eigenpair(lin, lam, q))
    if kind == "hoho":
        pairs.sort(key=lambda e: -e.omega)
        check_nonresonance(pairs[0].omega, pairs[1].omega)
    residual = float(np.linalg.norm(system.residual(y)))
    logger.info("%s point corrected in %d steps", kind, iterations)
    return CodimTwoPoint(kind, Equilibrium(x.copy(), alpha, residual, iterations), tuple(pairs), unfolding)


def classify_codim2(
    model: DelayModel,
    point: Union[HopfPoint, FoldPoint, Equilibrium, CodimTwoPoint],
    unfolding: Sequence[int],
    expect: Optional[str] = None,
    l1_tol: Optional[float] = 1e-6,
    imag_tol: float = 1e-6,
    k: int = 6,
    N: Optional[int] = None,
) -> CodimTwoPoint:
    """
    Match the critical spectrum against the genh / zeho / thopf / hoho patterns

    Args:
        expect: kind asserted by the caller; a mismatch raises AmbiguousPattern.
            With expect="genh" the L1 gate is skipped and L1 is only reported.
        l1_tol: |L1| threshold for calling a single imaginary pair genh
        imag_tol: |Re lambda| < imag_tol max(1, |lambda|) counts as critical
    """
    unfolding = check_unfolding(model, unfolding)
    eq = point if isinstance(point, Equilibrium) else point.equilibrium
    lin = linearize(model, eq.x, eq.alpha)
    eigs = rightmost(lin, k, N)
    zeros = [e for e in eigs if e.is_real and abs(e.lam) < imag_tol]
    imags = [e for e in eigs if not e.is_real and abs(e.lam.real) < imag_tol * max(1.0, abs(e.lam))]
    details: Dict[str, Any] = {
        "rightmost": [complex(e.lam) for e in eigs],
        "zero_count": len(zeros),
        "imaginary_count": len(imags),
    }
    l1 = None
    kind = None
    if len(zeros) == 1 and len(imags) == 1:
        kind = "thopf" if model.fixed_equilibrium else "zeho"
        pairs = (zeros[0], imags[0])
    elif not zeros and len(imags) == 2:
        kind = "hoho"
        pairs = tuple(sorted(imags, key=lambda e: -e.omega))
        check_nonresonance(pairs[0].omega, pairs[1].omega)
    elif not zeros and len(imags) == 1:
        pair = imags[0]
        if isinstance(point, HopfPoint):
            pair = point.eigenpair
        l1 = nmfm.first_lyapunov(make_bundle(model, eq.x, eq.alpha, 3), pair)
        details["L1"] = l1
        if expect == "genh" or (l1_tol is not None and abs(l1) < l1_tol):
            kind = "genh"
            pairs = (pair,)
    if kind is None or (expect is not None and expect != kind):
        raise AmbiguousPattern(
            "critical spectrum does not match the requested codimension-two pattern",
            {**details, "expected": expect, "found": kind},
        )
    logger.info("classified %s point at alpha = %s", kind, eq.alpha)
    return CodimTwoPoint(kind, eq, pairs, unfolding, l1=l1, spectrum=[complex(e.lam) for e in eigs])


def hopf_tests(model: DelayModel, point: HopfPoint, k: int = 6, N: Optional[int] = None) -> Dict[str, float]:
    """
    Test functions along a Hopf branch

    L1 and nearest_real_eig change sign at genh and zeho points. A second pair
    crossing the axis changes unstable_pairs, the number of complex pairs other
    than the Hopf pair with positive real part; second_pair_re is the real part
    of the other pair closest to the axis.
    """
    eq = point.equilibrium
    lin = linearize(model, eq.x, eq.alpha)
    eigs = rightmost(lin, k, N)
    l1 = nmfm.first_lyapunov(make_bundle(model, eq.x, eq.alpha, 3), point.eigenpair)
    reals = [e.lam.real for e in eigs if e.is_real]
    nearest = min(reals, key=abs) if reals else float("nan")
    others = [e for e in eigs if not e.is_real]
    if others:
        hopf = min(others, key=lambda e: abs(e.lam - 1j * point.omega))
        others = [e for e in others if e is not hopf]
    second = min((e.lam.real for e in others), key=abs, default=float("nan"))
    unstable = sum(1 for e in others if e.lam.real > 0)
    return {
        "L1": float(l1),
        "nearest_real_eig": float(nearest),
        "second_pair_re": float(second),
        "unstable_pairs": float(unstable),
    }


def with_l1(model: DelayModel, point: HopfPoint) -> HopfPoint:
    eq = point.equilibrium
    return replace(point, l1=nmfm.first_lyapunov(make_bundle(model, eq.x, eq.alpha, 3), point.eigenpair))
