"""
Discrete-delay DDE models and their multilinear derivative forms

x'(t) = f(x(t), x(t - tau_1), ..., x(t - tau_m); alpha)

A model evaluates f on lag samples (an n x (m+1) matrix whose column j is
the state at -tau_j). Derivatives D_1^r D_2^s f are provided either by a
closed-form oracle (sympy-generated for the built-in systems) or by central
finite differences with polarization.
"""

import logging
from itertools import permutations
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from ddenorm.charlin import CharLinearization, ExpPoly
from ddenorm.errors import InvalidInput, NotAnEquilibrium

logger = logging.getLogger(__name__)

StateArg = Union[ExpPoly, np.ndarray]

EQUILIBRIUM_TOL = 1e-8


class SymbolicOracle:
    """
    Closed-form derivatives of a right-hand side given as sympy expressions.

    Each mixed form D_1^r D_2^s f(U_1..U_r, V_1..V_s) is generated once by
    differentiating f(X + sum h_l U_l, alpha + sum k_l V_l) in every h_l and
    k_l at zero, then lambdified to numpy. The result is multilinear in the
    direction symbols, so complex directions give the complexified form.
    """

    def __init__(self, exprs: Sequence[sp.Expr], state_symbols: Sequence[Sequence[sp.Symbol]],
                 param_symbols: Sequence[sp.Symbol]):
        self.exprs = [sp.sympify(e) for e in exprs]
        self.state_symbols = [list(row) for row in state_symbols]
        self.param_symbols = list(param_symbols)
        self.n = len(self.state_symbols)
        self.cols = len(self.state_symbols[0])
        self._flat = [s for row in self.state_symbols for s in row]
        self._rhs = sp.lambdify((self._flat, self.param_symbols), self.exprs, modules="numpy")
        self._forms: Dict[Tuple[int, int], Callable] = {}

    def rhs(self, X: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        values = self._rhs(np.asarray(X).ravel(), np.asarray(alpha))
        return np.array([complex(v) for v in values]).real

    def _compile(self, r: int, s: int) -> Callable:
        hs = sp.symbols(f"h0:{r}") if r else ()
        ks = sp.symbols(f"k0:{s}") if s else ()
        state_dirs = [
            [sp.Symbol(f"u{l}_{i}") for i in range(len(self._flat))] for l in range(r)
        ]
        param_dirs = [
            [sp.Symbol(f"v{l}_{i}") for i in range(len(self.param_symbols))] for l in range(s)
        ]
        subs = {}
        for i, x in enumerate(self._flat):
            subs[x] = x + sum((hs[l] * state_dirs[l][i] for l in range(r)), sp.Integer(0))
        for i, a in enumerate(self.param_symbols):
            subs[a] = a + sum((ks[l] * param_dirs[l][i] for l in range(s)), sp.Integer(0))
        zero = {sym: 0 for sym in (*hs, *ks)}
        derived = []
        for expr in self.exprs:
            shifted = expr.xreplace(subs)
            for sym in (*hs, *ks):
                shifted = sp.diff(shifted, sym)
            derived.append(shifted.xreplace(zero))
        args = (self._flat, self.param_symbols, *state_dirs, *param_dirs)
        logger.debug("compiled derivative form (%d, %d)", r, s)
        return sp.lambdify(args, derived, modules="numpy")

    def form(self, X: np.ndarray, alpha: np.ndarray, state_dirs: Sequence[np.ndarray],
             param_dirs: Sequence[np.ndarray]) -> np.ndarray:
        key = (len(state_dirs), len(param_dirs))
        if key not in self._forms:
            self._forms[key] = self._compile(*key)
        fn = self._forms[key]
        values = fn(
            np.asarray(X, dtype=float).ravel(),
            np.asarray(alpha, dtype=float),
            *[np.asarray(u, dtype=complex).ravel() for u in state_dirs],
            *[np.asarray(v, dtype=complex).ravel() for v in param_dirs],
        )
        return np.array([complex(v) for v in values])


@dataclass(frozen=True)
class DelayModel:
    """A discrete-delay DDE with parameters"""

    name: str
    n: int
    parameter_names: Tuple[str, ...]
    delays: Callable[[np.ndarray], Sequence[float]]
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    deriv_oracle: Optional[object] = None
    delay_parameters: Tuple[int, ...] = ()
    time_rescaled: bool = False
    fixed_equilibrium: bool = False
    description: str = ""
    examples: Dict[str, dict] = field(default_factory=dict, compare=False)

    @property
    def p(self) -> int:
        return len(self.parameter_names)

    def parameter_index(self, name: str) -> int:
        try:
            return self.parameter_names.index(name)
        except ValueError:
            raise InvalidInput(
                f"unknown parameter '{name}' for model {self.name}",
                {"parameters": list(self.parameter_names)},
            ) from None

    def delay_values(self, alpha: np.ndarray) -> np.ndarray:
        taus = np.asarray(self.delays(np.asarray(alpha, dtype=float)), dtype=float).ravel()
        if taus.size == 0 or taus[0] != 0.0 or np.any(np.diff(taus) <= 0) or not np.all(np.isfinite(taus)):
            raise InvalidInput("delays must satisfy 0 = tau_0 < tau_1 < ...", {"taus": taus})
        return taus

    def samples(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Constant history at x as lag samples"""
        cols = self.delay_values(alpha).size
        return np.tile(np.asarray(x, dtype=float).reshape(-1, 1), (1, cols))


def _check_point(model: DelayModel, X: np.ndarray, alpha: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.size != model.p:
        raise InvalidInput("parameter vector has wrong length", {"expected": model.p, "got": alpha.size})
    cols = model.delay_values(alpha).size
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape != (model.n, cols):
        raise InvalidInput("history samples have wrong shape", {"expected": (model.n, cols), "got": X.shape})
    return X, alpha


def eval_rhs(model: DelayModel, X: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    X, alpha = _check_point(model, X, alpha)
    out = np.asarray(model.rhs(X, alpha), dtype=float).ravel()
    if out.size != model.n:
        raise InvalidInput("rhs returned wrong dimension", {"expected": model.n, "got": out.size})
    return out


# Finite differences

def fd_derivative(
    model: DelayModel,
    point: Tuple[np.ndarray, np.ndarray],
    order: int,
    directions: Tuple[Optional[np.ndarray], Optional[np.ndarray]],
    step: Optional[float] = None,
    richardson: bool = False,
) -> np.ndarray:
    """
    Central-difference directional derivative d^k/dh^k f(X + hU, alpha + hV) at h = 0

    Args:
        model: the DDE
        point: (X, alpha) lag samples and parameters
        order: derivative order k (1..5)
        directions: (U, V) state and parameter directions, either may be None
        step: difference step; defaults to eps^(1/(2+k)) scaled by the point
        richardson: combine steps h and h/2 to cancel the O(h^2) term

    Returns:
        Real n-vector
    """
    if not 1 <= order <= 5:
        raise InvalidInput("order must be between 1 and 5", {"order": order})
    X, alpha = _check_point(model, *point)
    U = np.zeros_like(X) if directions[0] is None else np.asarray(directions[0], dtype=float).reshape(X.shape)
    V = np.zeros_like(alpha) if directions[1] is None else np.asarray(directions[1], dtype=float).ravel()
    if step is None:
        scale = max(1.0, np.abs(X).max(initial=0.0), np.abs(alpha).max(initial=0.0))
        step = np.finfo(float).eps ** (1.0 / (2 + order)) * scale

    def central(h: float) -> np.ndarray:
        acc = np.zeros(model.n)
        for j in range(order + 1):
            shift = (order / 2.0 - j) * h
            acc += (-1) ** j * comb(order, j) * np.asarray(model.rhs(X + shift * U, alpha + shift * V), dtype=float)
        return acc / h ** order

    if richardson:
        return (4.0 * central(step / 2.0) - central(step)) / 3.0
    return central(step)


class FiniteDifferenceOracle:
    """Mixed forms by polarization of central differences, complexified per argument"""

    def __init__(self, model: DelayModel, richardson: bool = True):
        self.model = model
        self.richardson = richardson

    def _real_form(self, X, alpha, state_dirs, param_dirs) -> np.ndarray:
        k = len(state_dirs) + len(param_dirs)
        dirs = [(np.asarray(u, float), np.zeros_like(alpha)) for u in state_dirs]
        dirs += [(np.zeros_like(X), np.asarray(v, float)) for v in param_dirs]
        total = np.zeros(self.model.n)
        for signs in np.ndindex(*(2,) * k):
            eps = [1.0 if s == 0 else -1.0 for s in signs]
            U = sum(e * d[0] for e, d in zip(eps, dirs))
            V = sum(e * d[1] for e, d in zip(eps, dirs))
            total += np.prod(eps) * fd_derivative(
                self.model, (X, alpha), k, (U, V), richardson=self.richardson
            )
        return total / (2 ** k * factorial(k))

    def form(self, X, alpha, state_dirs, param_dirs) -> np.ndarray:
        args = [np.asarray(u, dtype=complex) for u in state_dirs] + [
            np.asarray(v, dtype=complex) for v in param_dirs
        ]
        r = len(state_dirs)
        for i, arg in enumerate(args):
            if np.any(arg.imag != 0):
                re = list(args)
                im = list(args)
                re[i] = arg.real.astype(complex)
                im[i] = arg.imag.astype(complex)
                return self.form(X, alpha, re[:r], re[r:]) + 1j * self.form(X, alpha, im[:r], im[r:])
        return self._real_form(X, alpha, [a.real for a in args[:r]], [a.real for a in args[r:]]).astype(complex)


def oracle_for(model: DelayModel):
    return model.deriv_oracle if model.deriv_oracle is not None else FiniteDifferenceOracle(model)


def linearize(model: DelayModel, x: np.ndarray, alpha: np.ndarray) -> CharLinearization:
    """M_j = D_{1,j} f at the constant history x"""
    alpha = np.asarray(alpha, dtype=float)
    taus = model.delay_values(alpha)
    X = model.samples(x, alpha)
    oracle = oracle_for(model)
    mats = np.zeros((taus.size, model.n, model.n))
    for j in range(taus.size):
        for i in range(model.n):
            U = np.zeros_like(X)
            U[i, j] = 1.0
            mats[j, :, i] = oracle.form(X, alpha, [U], []).real
    return CharLinearization(taus, mats)


@dataclass(frozen=True)
class MultilinearBundle:
    """
    Derivative forms of f at an equilibrium, contracted through the lag samples.

    State arguments are ExpPoly functions (sampled at -tau_j), lag-sample
    matrices, or constant n-vectors; parameter arguments are p-vectors.
    """

    model: DelayModel
    x: np.ndarray
    alpha: np.ndarray
    lin: CharLinearization
    max_order: int
    oracle: object

    @property
    def X(self) -> np.ndarray:
        return self.model.samples(self.x, self.alpha)

    def _samples(self, arg: StateArg) -> np.ndarray:
        if isinstance(arg, ExpPoly):
            return arg.lag_samples(self.lin.taus)
        arr = np.asarray(arg, dtype=complex)
        if arr.ndim == 1:
            return np.tile(arr.reshape(-1, 1), (1, self.lin.m + 1))
        return arr

    def unit(self, k: int) -> np.ndarray:
        e = np.zeros(self.model.p)
        e[k] = 1.0
        return e

    def form(self, r: int, s: int, *args) -> np.ndarray:
        if r + s > self.max_order:
            raise InvalidInput("form order exceeds bundle order", {"order": r + s, "max": self.max_order})
        if len(args) != r + s:
            raise InvalidInput("wrong number of form arguments", {"expected": r + s, "got": len(args)})
        state = [self._samples(a) for a in args[:r]]
        params = [np.asarray(v, dtype=complex).ravel() for v in args[r:]]
        return self.oracle.form(self.X, self.alpha, state, params)

    def B(self, u, v):
        return self.form(2, 0, u, v)

    def C(self, u, v, w):
        return self.form(3, 0, u, v, w)

    def D(self, u, v, w, y):
        return self.form(4, 0, u, v, w, y)

    def E(self, u, v, w, y, z):
        return self.form(5, 0, u, v, w, y, z)

    def A1(self, u, v):
        return self.form(1, 1, u, v)

    def B1(self, u, w, v):
        return self.form(2, 1, u, w, v)

    def C1(self, u, w, y, v):
        return self.form(3, 1, u, w, y, v)

    def J1(self, v: Optional[np.ndarray] = None) -> np.ndarray:
        if v is not None:
            return self.form(0, 1, v)
        return np.column_stack([self.form(0, 1, self.unit(k)) for k in range(self.model.p)]).real

    def J2(self, v, w):
        return self.form(0, 2, v, w)


def make_bundle(model: DelayModel, x: np.ndarray, alpha: np.ndarray, max_order: int = 5) -> MultilinearBundle:
    if not 1 <= max_order <= 5:
        raise InvalidInput("max_order must be between 1 and 5", {"max_order": max_order})
    x = np.asarray(x, dtype=float).ravel()
    alpha = np.asarray(alpha, dtype=float).ravel()
    residual = float(np.linalg.norm(eval_rhs(model, model.samples(x, alpha), alpha)))
    if residual > EQUILIBRIUM_TOL:
        raise NotAnEquilibrium("base point is not an equilibrium", {"residual": residual})
    return MultilinearBundle(model, x, alpha, linearize(model, x, alpha), max_order, oracle_for(model))


def symmetry_defect(bundle: MultilinearBundle, r: int, s: int, args: List) -> float:
    """Largest relative change of a form under permutations of its state arguments"""
    base = bundle.form(r, s, *args)
    scale = max(np.linalg.norm(base), np.finfo(float).tiny)
    worst = 0.0
    for perm in permutations(range(r)):
        permuted = [args[i] for i in perm] + list(args[r:])
        worst = max(worst, float(np.linalg.norm(bundle.form(r, s, *permuted) - base) / scale))
    return worst
