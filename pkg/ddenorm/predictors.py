"""
Predictors - asymptotic expansions of the curves emanating from codim-2 points

Each predictor maps an amplitude eps to normal-form parameters beta(eps),
original parameters alpha = alpha0 + K beta, an equilibrium approximation and,
for cycle branches, a period estimate and a sampled cycle profile.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ddenorm.errors import Degenerate, DegenerateL2, TorusAbsent
from ddenorm.nmfm import GenHData, HoHoData, NormalFormData, ZeHoData

logger = logging.getLogger(__name__)

PROFILE_POINTS = 128
DEGENERACY_TOL = 1e-10
EXACT_TOL = 1e-14


def default_eps_grid() -> np.ndarray:
    """Geometric grid, 20 points per decade over [1e-4, 1e-1]"""
    return np.logspace(-4, -1, 61)


def diagnostic_eps_grid() -> np.ndarray:
    return np.logspace(-3, -1, 21)


@dataclass
class CycleApprox:
    alpha: np.ndarray
    period: float
    amplitude: float
    psi: np.ndarray
    profile: np.ndarray

    def rows(self) -> List[List[float]]:
        return [[float(s), *map(float, u)] for s, u in zip(self.psi, self.profile)]


@dataclass
class PredictedPoint:
    eps: float
    beta: np.ndarray
    alpha: np.ndarray
    x: np.ndarray
    omega: Optional[float] = None
    cycle: Optional[CycleApprox] = None

    def to_dict(self, with_profile: bool = True) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "eps": self.eps,
            "beta": self.beta.tolist(),
            "alpha": self.alpha.tolist(),
            "x": self.x.tolist(),
        }
        if self.omega is not None:
            out["omega"] = self.omega
        if self.cycle is not None:
            out["period"] = self.cycle.period
            if with_profile:
                out["profile"] = self.cycle.rows()
        return out


@dataclass
class Predictor:
    """One emanating curve, evaluated on an eps grid"""

    kind: str
    source: str
    evaluate: Callable[[float], PredictedPoint] = field(repr=False)
    residual: Callable[[float], float] = field(repr=False)
    claimed_order: float
    eps_sign: str = "any"
    points: List[PredictedPoint] = field(default_factory=list)
    residual_order: float = float("nan")

    def at(self, eps: float) -> PredictedPoint:
        return self.evaluate(float(eps))

    def sample(self, eps_list: Sequence[float]) -> List[PredictedPoint]:
        eps_list = [float(e) for e in eps_list]
        if self.eps_sign == "positive":
            eps_list = [e for e in eps_list if e >= 0.0]
        self.points = [self.evaluate(e) for e in eps_list]
        return self.points

    def fit_residual_order(self, eps_list: Optional[Sequence[float]] = None) -> float:
        self.residual_order = residual_order(self.residual, diagnostic_eps_grid() if eps_list is None else eps_list)
        return self.residual_order

    def to_dict(self, with_profile: bool = True) -> Dict[str, Any]:
        order = self.residual_order
        return {
            "kind": self.kind,
            "source": self.source,
            "eps_sign": self.eps_sign,
            "claimed_order": self.claimed_order,
            "residual_order": "exact" if np.isinf(order) else order,
            "points": [p.to_dict(with_profile) for p in self.points],
        }


@dataclass
class PredictorSet:
    source: str
    predictors: Dict[str, Predictor]
    excluded: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    notes: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, kind: str) -> Predictor:
        return self.predictors[kind]

    def __contains__(self, kind: str) -> bool:
        return kind in self.predictors

    def to_dict(self, with_profile: bool = True) -> Dict[str, Any]:
        return {
            "source": self.source,
            "predictors": {k: p.to_dict(with_profile) for k, p in self.predictors.items()},
            "excluded": self.excluded,
            "notes": self.notes,
        }


def residual_order(residual: Callable[[float], float], eps_list: Sequence[float]) -> float:
    """
    Fitted log-log slope of the truncated amplitude-system residual versus eps

    Returns inf when the predictor solves the truncated system exactly.
    """
    eps = np.asarray([e for e in eps_list if e > 0], dtype=float)
    values = np.array([abs(residual(e)) for e in eps])
    if np.all(values <= EXACT_TOL * np.maximum(eps, 1.0)):
        return float("inf")
    keep = values > 0
    if keep.sum() < 2:
        return float("inf")
    slope, _ = np.polyfit(np.log(eps[keep]), np.log(values[keep]), 1)
    return float(slope)


def _real(v: np.ndarray, label: str) -> np.ndarray:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        scale = max(np.abs(v).max(initial=0.0), 1.0)
        if np.abs(v.imag).max(initial=0.0) > 1e-8 * scale:
            logger.warning("%s has an imaginary part of %.2e", label, np.abs(v.imag).max())
        return v.real.copy()
    return v.astype(float)


def _profile_mesh(n: int = PROFILE_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, n)


def _cycle(alpha: np.ndarray, period: float, eps: float, base: np.ndarray, first: np.ndarray,
           second: Optional[np.ndarray] = None) -> CycleApprox:
    """u(psi) = base + 2 Re(exp(i psi) first) + Re(exp(2 i psi) second)"""
    psi = _profile_mesh()
    rot = np.exp(1j * psi)[:, None]
    u = base[None, :] + 2 * (rot * first[None, :]).real
    if second is not None:
        u = u + (rot ** 2 * second[None, :]).real
    return CycleApprox(alpha, float(period), float(eps), psi, u)


def _period(omega: float) -> float:
    if omega <= 0:
        logger.warning("non-positive frequency estimate %.3g on a predicted cycle", omega)
        return float("inf")
    return 2 * np.pi / omega


def _beta_combination(d: NormalFormData, names: Sequence[str], column: int) -> np.ndarray:
    """sum_k K[k, column] H_k(0) for coefficients stored per unfolding direction"""
    return sum(d.K[k, column] * d.head(name) for k, name in enumerate(names))


# Generalized Hopf

def genh_predictors(d: GenHData, eps_list: Optional[Sequence[float]] = None) -> PredictorSet:
    eps_list = default_eps_grid() if eps_list is None else eps_list
    re_c2 = d.c2.real
    if abs(re_c2) < DEGENERACY_TOL:
        raise DegenerateL2("Re c2 vanishes; the LPC curve is not predicted", {"c2": [re_c2, d.c2.imag]})
    q = d.eigenpair.q
    static = ("0010", "0001")
    h_beta1 = _beta_combination(d, static, 0)
    h_beta2 = _beta_combination(d, static, 1)
    h2000, h1100 = d.head("2000"), d.head("1100")

    def lpc(eps: float) -> PredictedPoint:
        beta = np.array([re_c2 * eps ** 4, -2 * re_c2 * eps ** 2])
        alpha = d.alpha_of(beta)
        base = d.x + _real((h1100 - 2 * re_c2 * h_beta2) * eps ** 2, "LPC profile")
        omega = d.omega0 + (d.c1.imag - 2 * re_c2 * d.omega01) * eps ** 2
        cycle = _cycle(alpha, _period(omega), eps, base, q * eps, h2000 * eps ** 2)
        return PredictedPoint(eps, beta, alpha, d.x.copy(), omega, cycle)

    def lpc_residual(eps: float) -> float:
        b1, b2 = re_c2 * eps ** 4, -2 * re_c2 * eps ** 2
        rho2 = eps ** 2
        return float(np.hypot(b1 + b2 * rho2 + re_c2 * rho2 ** 2, b2 + 2 * re_c2 * rho2))

    def hopf(eps: float) -> PredictedPoint:
        beta = np.array([0.0, eps])
        x = d.x + _real(h_beta1 * beta[0] + h_beta2 * beta[1], "Hopf equilibrium")
        return PredictedPoint(eps, beta, d.alpha_of(beta), x, d.omega0 + d.omega01 * eps)

    predictors = {
        "lpc": Predictor("lpc", "genh", lpc, lpc_residual, 4.0, eps_sign="positive"),
        "hopf": Predictor("hopf", "genh", hopf, lambda eps: 0.0, 2.0),
    }
    return _finish("genh", predictors, eps_list, notes={"L2": d.l2})


# Fold-Hopf

def _zeho_amplitude(d: ZeHoData, beta: np.ndarray, z0: float, rho: float, transcritical: bool) -> np.ndarray:
    """Equilibrium equations of the truncated amplitude system"""
    b1, b2 = beta
    linear = b1 * z0 if transcritical else b1
    f1 = linear + d.g200 * z0 ** 2 + d.g011 * rho ** 2 + d.g111 * z0 * rho ** 2 + d.g300 * z0 ** 3
    f2 = b2 + d.g110.real * z0 + d.g210.real * z0 ** 2 + d.g021.real * rho ** 2
    return np.array([f1, f2])


def _zeho_trace(d: ZeHoData, beta: np.ndarray, z0: float, rho: float, transcritical: bool) -> float:
    linear = beta[0] if transcritical else 0.0
    return (linear + 2 * d.g200 * z0 + d.g111 * rho ** 2 + 3 * d.g300 * z0 ** 2
            + 2 * d.g021.real * rho ** 2)


def _ns_condition(d: ZeHoData) -> Optional[TorusAbsent]:
    if d.g011 * d.g110.real < 0:
        return None
    return TorusAbsent(
        "g011 Re(g110) >= 0: no Neimark-Sacker curve emanates",
        {"g011": d.g011, "Re_g110": d.g110.real},
    )


def _torus_note(d: ZeHoData) -> Dict[str, Any]:
    e = d.e
    return {"e": e, "torus": "unstable torus" if e > 0 else "stable torus" if e < 0 else "undetermined"}


def zeho_predictors(d: ZeHoData, eps_list: Optional[Sequence[float]] = None) -> PredictorSet:
    if d.transcritical:
        return thopf_predictors(d, eps_list)
    eps_list = default_eps_grid() if eps_list is None else eps_list
    if abs(d.g200) < DEGENERACY_TOL:
        raise Degenerate("g200 vanishes", {"g200": d.g200})
    zero, hopf_pair = d.eigenpairs
    q0, q1 = zero.q.real, hopf_pair.q
    h10, h01 = _real(d.head("00010"), "H00010"), _real(d.head("00001"), "H00001")
    h20000 = _real(d.head("20000"), "H20000")
    h01100 = _real(d.head("01100"), "H01100")
    h02000 = d.head("02000")
    re_g110, re_g021 = d.g110.real, d.g021.real

    def equilibrium(beta: np.ndarray, z0: float) -> np.ndarray:
        return d.x + z0 * q0 + h10 * beta[0] + h01 * beta[1] + 0.5 * h20000 * z0 ** 2

    def omega_at(beta: np.ndarray, z0: float, rho2: float = 0.0) -> float:
        return d.omega0 + d.omega1 * beta[0] + d.omega2 * beta[1] + d.g110.imag * z0 + d.g021.imag * rho2

    b2_coef = (re_g110 * (2 * re_g021 + d.g111) - 2 * re_g021 * d.g200) / (2 * d.g200)
    z0_coef = -(2 * re_g021 + d.g111) / (2 * d.g200)

    def ns_beta(eps: float):
        return np.array([-d.g011 * eps ** 2, b2_coef * eps ** 2]), z0_coef * eps ** 2

    def ns(eps: float) -> PredictedPoint:
        beta, z0 = ns_beta(eps)
        alpha = d.alpha_of(beta)
        base = d.x + (b2_coef * h01 - d.g011 * h10 + h01100 + z0_coef * q0) * eps ** 2
        omega = omega_at(beta, z0, eps ** 2)
        cycle = _cycle(alpha, _period(omega), eps, base, q1 * eps, h02000 * eps ** 2)
        return PredictedPoint(eps, beta, alpha, equilibrium(beta, z0), omega, cycle)

    def ns_residual(eps: float) -> float:
        beta, z0 = ns_beta(eps)
        f = _zeho_amplitude(d, beta, z0, eps, False)
        return float(np.linalg.norm([*f, _zeho_trace(d, beta, z0, eps, False)]))

    def fold(eps: float) -> PredictedPoint:
        beta = np.array([0.0, eps])
        return PredictedPoint(eps, beta, d.alpha_of(beta), equilibrium(beta, 0.0))

    def fold_residual(eps: float) -> float:
        return float(abs(_zeho_amplitude(d, np.array([0.0, eps]), 0.0, 0.0, False)[0]))

    def hopf_point(eps: float):
        return np.array([-d.g200 / re_g110 ** 2 * eps ** 2, eps]), -eps / re_g110

    def hopf(eps: float) -> PredictedPoint:
        beta, z0 = hopf_point(eps)
        return PredictedPoint(eps, beta, d.alpha_of(beta), equilibrium(beta, z0), omega_at(beta, z0))

    def hopf_residual(eps: float) -> float:
        beta, z0 = hopf_point(eps)
        return float(np.linalg.norm(_zeho_amplitude(d, beta, z0, 0.0, False)))

    predictors = {
        "fold": Predictor("fold", "zeho", fold, fold_residual, 2.0),
        "hopf": Predictor("hopf", "zeho", hopf, hopf_residual, 2.0),
    }
    if abs(re_g110) < DEGENERACY_TOL:
        del predictors["hopf"]
        excluded = {"hopf": Degenerate("Re g110 vanishes", {"Re_g110": re_g110}).to_dict()}
    else:
        excluded = {}
    absent = _ns_condition(d)
    if absent is None:
        predictors["ns"] = Predictor("ns", "zeho", ns, ns_residual, 4.0, eps_sign="positive")
    else:
        logger.info("Neimark-Sacker branch excluded: %s", absent)
        excluded["ns"] = absent.to_dict()
    return _finish("zeho", predictors, eps_list, excluded, _torus_note(d))


# Transcritical-Hopf

def thopf_predictors(d: ZeHoData, eps_list: Optional[Sequence[float]] = None) -> PredictorSet:
    eps_list = default_eps_grid() if eps_list is None else eps_list
    if abs(d.g200) < DEGENERACY_TOL:
        raise Degenerate("g200 vanishes", {"g200": d.g200})
    zero, hopf_pair = d.eigenpairs
    q0, q1 = zero.q.real, hopf_pair.q
    h20000 = _real(d.head("20000"), "H20000")
    re_g110 = d.g110.real

    def equilibrium(z0: float) -> np.ndarray:
        return d.x + z0 * q0 + 0.5 * h20000 * z0 ** 2

    def omega_at(beta: np.ndarray, z0: float) -> float:
        return d.omega0 + d.omega1 * beta[0] + d.omega2 * beta[1] + d.g110.imag * z0

    predictors: Dict[str, Predictor] = {}
    excluded: Dict[str, Dict[str, Any]] = {}
    absent = _ns_condition(d)
    if absent is None and d.g011 / d.g200 <= 0:
        absent = TorusAbsent("g011/g200 <= 0: the square root in the NS predictor is not real",
                             {"g011": d.g011, "g200": d.g200})
    if absent is None:
        root = np.sqrt(d.g011 / d.g200)
        for label, sign in (("ns_plus", 1.0), ("ns_minus", -1.0)):
            predictors[label] = _thopf_ns(d, label, sign * root, q0, q1, omega_at)
    else:
        logger.info("Neimark-Sacker branches excluded: %s", absent)
        excluded["ns_plus"] = excluded["ns_minus"] = absent.to_dict()

    def transcritical(eps: float) -> PredictedPoint:
        beta = np.array([0.0, eps])
        return PredictedPoint(eps, beta, d.alpha_of(beta), d.x.copy())

    def transcritical_residual(eps: float) -> float:
        return float(abs(_zeho_amplitude(d, np.array([0.0, eps]), 0.0, 0.0, True)[0]))

    def hopf1_point(eps: float):
        return np.array([eps, re_g110 / d.g200 * eps]), -eps / d.g200

    def hopf1(eps: float) -> PredictedPoint:
        beta, z0 = hopf1_point(eps)
        return PredictedPoint(eps, beta, d.alpha_of(beta), equilibrium(z0), omega_at(beta, z0))

    def hopf1_residual(eps: float) -> float:
        beta, z0 = hopf1_point(eps)
        return float(np.linalg.norm(_zeho_amplitude(d, beta, z0, 0.0, True)))

    def hopf2(eps: float) -> PredictedPoint:
        beta = np.array([eps, 0.0])
        return PredictedPoint(eps, beta, d.alpha_of(beta), d.x.copy(), omega_at(beta, 0.0))

    def hopf2_residual(eps: float) -> float:
        return float(abs(_zeho_amplitude(d, np.array([eps, 0.0]), 0.0, 0.0, True)[1]))

    predictors["transcritical"] = Predictor("transcritical", "thopf", transcritical, transcritical_residual, 2.0)
    predictors["hopf1"] = Predictor("hopf1", "thopf", hopf1, hopf1_residual, 2.0)
    predictors["hopf2"] = Predictor("hopf2", "thopf", hopf2, hopf2_residual, 2.0)
    return _finish("thopf", predictors, eps_list, excluded, _torus_note(d))


def _thopf_ns(d: ZeHoData, label: str, z0_coef: float, q0: np.ndarray, q1: np.ndarray,
              omega_at: Callable[[np.ndarray, float], float]) -> Predictor:
    def beta_of(eps: float):
        z0 = z0_coef * eps
        return np.array([-2 * d.g200 * z0, -d.g110.real * z0]), z0

    def evaluate(eps: float) -> PredictedPoint:
        beta, z0 = beta_of(eps)
        alpha = d.alpha_of(beta)
        omega = omega_at(beta, z0)
        cycle = _cycle(alpha, _period(omega), eps, d.x + z0 * q0, q1 * eps)
        return PredictedPoint(eps, beta, alpha, d.x.copy(), omega, cycle)

    def residual(eps: float) -> float:
        beta, z0 = beta_of(eps)
        f = _zeho_amplitude(d, beta, z0, eps, True)
        return float(np.linalg.norm([*f, _zeho_trace(d, beta, z0, eps, True)]))

    return Predictor(label, "thopf", evaluate, residual, 2.0, eps_sign="positive")


# Hopf-Hopf

def hoho_predictors(d: HoHoData, eps_list: Optional[Sequence[float]] = None) -> PredictorSet:
    eps_list = default_eps_grid() if eps_list is None else eps_list
    g = {"2100": d.g2100.real, "1011": d.g1011.real, "1110": d.g1110.real, "0021": d.g0021.real}
    if abs(g["2100"]) < DEGENERACY_TOL or abs(g["0021"]) < DEGENERACY_TOL:
        raise Degenerate("Re g2100 or Re g0021 vanishes", {"Re_g2100": g["2100"], "Re_g0021": g["0021"]})
    first, second = d.eigenpairs
    h1, h2 = _real(d.head("000010"), "H000010"), _real(d.head("000001"), "H000001")
    b = d.b

    def amplitude(beta: np.ndarray, rho1: float, rho2: float) -> np.ndarray:
        return np.array([
            beta[0] + g["2100"] * rho1 ** 2 + g["1011"] * rho2 ** 2,
            beta[1] + g["1110"] * rho1 ** 2 + g["0021"] * rho2 ** 2,
        ])

    def equilibrium(beta: np.ndarray) -> np.ndarray:
        return d.x + h1 * beta[0] + h2 * beta[1]

    def ns_branch(label: str, idx: int) -> Predictor:
        pair = (first, second)[idx]
        if idx == 0:
            coefs = np.array([-g["2100"], -g["1110"]])
            quad, second_order, im_g = "110000", "200000", d.g2100.imag
        else:
            coefs = np.array([-g["1011"], -g["0021"]])
            quad, second_order, im_g = "001100", "002000", d.g0021.imag
        omega0 = (d.omega1, d.omega2)[idx]
        h_quad = _real(d.head(quad), f"H{quad}")
        h_second = d.head(second_order)

        def evaluate(eps: float) -> PredictedPoint:
            beta = coefs * eps ** 2
            alpha = d.alpha_of(beta)
            omega = omega0 + b[idx] @ beta + im_g * eps ** 2
            base = d.x + (coefs[0] * h1 + coefs[1] * h2 + h_quad) * eps ** 2
            cycle = _cycle(alpha, _period(omega), eps, base, pair.q * eps, h_second * eps ** 2)
            return PredictedPoint(eps, beta, alpha, equilibrium(beta), omega, cycle)

        def residual(eps: float) -> float:
            rho = (eps, 0.0) if idx == 0 else (0.0, eps)
            return float(np.linalg.norm(amplitude(coefs * eps ** 2, *rho)))

        return Predictor(label, "hoho", evaluate, residual, 4.0, eps_sign="positive")

    def hopf_branch(label: str, idx: int) -> Predictor:
        omega0 = (d.omega1, d.omega2)[idx]

        def evaluate(eps: float) -> PredictedPoint:
            beta = np.array([0.0, eps]) if idx == 0 else np.array([eps, 0.0])
            return PredictedPoint(eps, beta, d.alpha_of(beta), equilibrium(beta), omega0 + b[idx] @ beta)

        def residual(eps: float) -> float:
            beta = np.array([0.0, eps]) if idx == 0 else np.array([eps, 0.0])
            return float(abs(beta[idx]))

        return Predictor(label, "hoho", evaluate, residual, 2.0)

    predictors = {
        "ns1": ns_branch("ns1", 0),
        "ns2": ns_branch("ns2", 1),
        "hopf1": hopf_branch("hopf1", 0),
        "hopf2": hopf_branch("hopf2", 1),
    }
    return _finish("hoho", predictors, eps_list, notes={"theta": d.theta, "delta": d.delta})


def _finish(source: str, predictors: Dict[str, Predictor], eps_list: Sequence[float],
            excluded: Optional[Dict[str, Dict[str, Any]]] = None,
            notes: Optional[Dict[str, Any]] = None) -> PredictorSet:
    for predictor in predictors.values():
        predictor.sample(eps_list)
        predictor.fit_residual_order()
        logger.debug("%s/%s residual order %.3g", source, predictor.kind, predictor.residual_order)
    return PredictorSet(source, predictors, excluded or {}, notes or {})


def predictors_for(d: NormalFormData, eps_list: Optional[Sequence[float]] = None) -> PredictorSet:
    """Dispatch on the normal-form kind"""
    if isinstance(d, GenHData):
        return genh_predictors(d, eps_list)
    if isinstance(d, HoHoData):
        return hoho_predictors(d, eps_list)
    if isinstance(d, ZeHoData):
        return thopf_predictors(d, eps_list) if d.transcritical else zeho_predictors(d, eps_list)
    raise TypeError(f"no predictors for {type(d).__name__}")
