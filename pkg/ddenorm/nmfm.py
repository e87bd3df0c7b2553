"""
Normal form coefficients - generalized Hopf, fold-Hopf, Hopf-Hopf and transcritical-Hopf

The center manifold coefficients H are solved degree by degree; resonant
coefficients follow from the Fredholm solvability condition and the singular
systems are solved with the bordered inverse. Parameter-related coefficients
give the linear map K from normal-form parameters beta to the unfolding
parameters alpha.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ddenorm.charlin import ExpPoly, binv, resolvent_residuals, resolvent_solve, solve_bordered
from ddenorm.errors import Degenerate, InconsistentSystem, InvalidInput, SingularParameterMatrix
from ddenorm.model import DelayModel, MultilinearBundle, make_bundle
from ddenorm.spectrum import Eigenpair

if TYPE_CHECKING:
    from ddenorm.points import CodimTwoPoint

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
COND_MAX = 1e8
DEGENERACY_TOL = 1e-10


def _complex(value: complex) -> list:
    value = complex(value)
    return [value.real, value.imag]


class HomologicalSolver:
    """Solves the linear systems of one normal-form computation and records residuals"""

    def __init__(self, bundle: MultilinearBundle):
        self.bundle = bundle
        self.lin = bundle.lin
        self.H: Dict[str, ExpPoly] = {}
        self.residuals: Dict[str, float] = {}

    def _record(self, name: str, z: complex, v: ExpPoly, w0: np.ndarray, w: Optional[ExpPoly]) -> ExpPoly:
        interior, boundary = resolvent_residuals(self.lin, z, v, w0, w)
        residual = max(interior, boundary)
        self.residuals[name] = residual
        if not residual <= RESIDUAL_TOL:
            raise InconsistentSystem(
                f"H{name} does not satisfy its homological equation",
                {"H": name, "residual": residual, "interior": interior, "boundary": boundary, "tol": RESIDUAL_TOL},
            )
        logger.debug("H%s solved, residual %.2e", name, residual)
        self.H[name] = v
        return v

    def regular(self, name: str, z: complex, w0: np.ndarray, w: Optional[ExpPoly] = None) -> ExpPoly:
        v = resolvent_solve(self.lin, z, w0, w)
        return self._record(name, z, v, w0, w)

    def singular(self, name: str, pair: Eigenpair, eta: np.ndarray, kappa: complex) -> ExpPoly:
        v = binv(self.lin, pair.lam, pair.q, pair.p, eta, kappa)
        span = self.lin.tau_max
        w0 = np.asarray(eta, dtype=complex) + kappa * pair.q
        return self._record(name, pair.lam, v, w0, kappa * pair.phi(span))

    def phi(self, pair: Eigenpair) -> ExpPoly:
        return pair.phi(self.lin.tau_max)


def _embed(bundle: MultilinearBundle, unfolding: Tuple[int, int], v2: Sequence[float]) -> np.ndarray:
    v = np.zeros(bundle.model.p)
    v[list(unfolding)] = np.asarray(v2, dtype=float)
    return v


def _invert_parameter_matrix(G: np.ndarray, label: str) -> Tuple[np.ndarray, float]:
    cond = float(np.linalg.cond(G))
    logger.info("%s parameter matrix condition number %.3e", label, cond)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise SingularParameterMatrix(
            f"{label} parameter matrix is numerically singular (transversality fails)",
            {"cond": cond, "matrix": G},
        )
    return linalg.inv(G), cond


@dataclass
class NormalFormData:
    """Fields shared by all codimension-two normal forms"""

    kind: str
    x: np.ndarray
    alpha: np.ndarray
    unfolding: Tuple[int, int]
    K: np.ndarray
    H: Dict[str, ExpPoly] = field(default_factory=dict, repr=False)
    residuals: Dict[str, float] = field(default_factory=dict, repr=False)
    cond: float = float("nan")

    @property
    def K10(self) -> np.ndarray:
        return self.K[:, 0]

    @property
    def K01(self) -> np.ndarray:
        return self.K[:, 1]

    def alpha_of(self, beta: Sequence[float]) -> np.ndarray:
        """alpha = alpha0 + K10 beta1 + K01 beta2 in the full parameter vector"""
        alpha = self.alpha.copy()
        alpha[list(self.unfolding)] += self.K @ np.asarray(beta, dtype=float)
        return alpha

    def head(self, name: str) -> np.ndarray:
        return self.H[name](0.0)

    def _base_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "x": self.x.tolist(),
            "alpha": self.alpha.tolist(),
            "unfolding": list(self.unfolding),
            "K10": self.K10.tolist(),
            "K01": self.K01.tolist(),
            "cond": self.cond,
            "max_residual": max(self.residuals.values(), default=0.0),
        }


@dataclass
class GenHData(NormalFormData):
    omega0: float = 0.0
    eigenpair: Optional[Eigenpair] = None
    c1: complex = 0j
    c2: complex = 0j
    gamma: Dict[str, complex] = field(default_factory=dict)
    omega10: float = 0.0
    omega01: float = 0.0

    @property
    def l1(self) -> float:
        return self.c1.real / self.omega0

    @property
    def l2(self) -> float:
        return self.c2.real / self.omega0

    def to_dict(self) -> Dict[str, Any]:
        out = self._base_dict()
        out.update({
            "omega0": self.omega0,
            "c1": _complex(self.c1),
            "c2": _complex(self.c2),
            "L1": self.l1,
            "L2": self.l2,
            "omega10": self.omega10,
            "omega01": self.omega01,
            "db1_dbeta2": self.omega01,
        })
        out.update({name: _complex(value) for name, value in self.gamma.items()})
        return out


@dataclass
class ZeHoData(NormalFormData):
    omega0: float = 0.0
    eigenpairs: Tuple[Eigenpair, ...] = ()
    g200: float = 0.0
    g011: float = 0.0
    g300: float = 0.0
    g111: float = 0.0
    g110: complex = 0j
    g210: complex = 0j
    g021: complex = 0j
    omega1: float = 0.0
    omega2: float = 0.0
    deltas: Tuple[float, ...] = ()
    frame: Optional[Tuple[np.ndarray, np.ndarray]] = None
    transcritical: bool = False

    @property
    def s_product(self) -> float:
        return self.g200 * self.g011

    @property
    def s(self) -> int:
        return int(np.sign(self.s_product))

    @property
    def theta(self) -> float:
        return self.g110.real / self.g200

    @property
    def e(self) -> float:
        value = (
            self.g210
            + self.g110 * (self.g021.real / self.g011 - 1.5 * self.g300 / self.g200 + self.g111 / (2 * self.g011))
            - self.g021 * self.g200 / self.g011
        )
        return float(value.real)

    def to_dict(self) -> Dict[str, Any]:
        out = self._base_dict()
        out.update({
            "omega0": self.omega0,
            "g200": self.g200,
            "g011": self.g011,
            "g300": self.g300,
            "g111": self.g111,
            "g110": _complex(self.g110),
            "g210": _complex(self.g210),
            "g021": _complex(self.g021),
            "s": self.s,
            "s_product": self.s_product,
            "theta": self.theta,
            "e": self.e,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "transcritical": self.transcritical,
        })
        if self.deltas:
            out["deltas"] = list(self.deltas)
        return out


@dataclass
class HoHoData(NormalFormData):
    omega1: float = 0.0
    omega2: float = 0.0
    eigenpairs: Tuple[Eigenpair, ...] = ()
    g2100: complex = 0j
    g1011: complex = 0j
    g1110: complex = 0j
    g0021: complex = 0j
    Gamma: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    @property
    def theta(self) -> float:
        return self.g1011.real / self.g0021.real

    @property
    def delta(self) -> float:
        return self.g1110.real / self.g2100.real

    def to_dict(self) -> Dict[str, Any]:
        out = self._base_dict()
        out.update({
            "omega1": self.omega1,
            "omega2": self.omega2,
            "g2100": _complex(self.g2100),
            "g1011": _complex(self.g1011),
            "g1110": _complex(self.g1110),
            "g0021": _complex(self.g0021),
            "theta": self.theta,
            "delta": self.delta,
        })
        for j in range(2):
            for k in range(2):
                out[f"b{j + 1}{k + 1}"] = float(self.b[j, k])
        return out


# Generalized Hopf

def _hopf_quadratic(solver: HomologicalSolver, pair: Eigenpair) -> Tuple[ExpPoly, ExpPoly]:
    B = solver.bundle.B
    phi = solver.phi(pair)
    h2000 = solver.regular("2000", 2 * pair.lam, B(phi, phi))
    h1100 = solver.regular("1100", pair.lam + pair.lam.conjugate(), B(phi, phi.conj()))
    return h2000, h1100


def _c1(bundle: MultilinearBundle, pair: Eigenpair, phi: ExpPoly, h2000: ExpPoly, h1100: ExpPoly) -> complex:
    B, C = bundle.B, bundle.C
    phib = phi.conj()
    return complex(0.5 * pair.p @ (B(phib, h2000) + 2 * B(phi, h1100) + C(phi, phi, phib)))


def first_lyapunov(bundle: MultilinearBundle, pair: Eigenpair) -> float:
    """L1 = Re c1 / omega at a Hopf point (order-3 truncation)"""
    solver = HomologicalSolver(bundle)
    h2000, h1100 = _hopf_quadratic(solver, pair)
    c1 = _c1(bundle, pair, solver.phi(pair), h2000, h1100)
    return float(c1.real / pair.omega)


def _unfolding(pt: "CodimTwoPoint", unfolding: Optional[Sequence[int]]) -> Tuple[int, int]:
    unfolding = tuple(pt.unfolding if unfolding is None else unfolding)
    if len(unfolding) != 2:
        raise InvalidInput("exactly two unfolding parameters are required", {"unfolding": unfolding})
    return unfolding


def _check_kind(pt: "CodimTwoPoint", kinds: Sequence[str]):
    if pt.kind not in kinds:
        raise InvalidInput(f"expected a {' or '.join(kinds)} point, got {pt.kind}")


def genh_normal_form(model: DelayModel, pt: "CodimTwoPoint", unfolding: Optional[Sequence[int]] = None) -> GenHData:
    """
    Critical coefficients c1, c2 and the parameter map at a generalized Hopf point

    Args:
        model: the DDE
        pt: classified genh point
        unfolding: two parameter indices (defaults to pt.unfolding)

    Returns:
        GenHData with l1, l2, K, omega10 / omega01 and the H store
    """
    _check_kind(pt, ("genh",))
    unfolding = _unfolding(pt, unfolding)
    eq = pt.equilibrium
    bundle = make_bundle(model, eq.x, eq.alpha, 5)
    solver = HomologicalSolver(bundle)
    B, C, D, E = bundle.B, bundle.C, bundle.D, bundle.E
    A1, B1, C1 = bundle.A1, bundle.B1, bundle.C1
    (pair,) = pt.eigenpairs
    lam, p = pair.lam, pair.p
    phi = solver.phi(pair)
    phib = phi.conj()

    h2000, h1100 = _hopf_quadratic(solver, pair)
    c1 = _c1(bundle, pair, phi, h2000, h1100)
    h3000 = solver.regular("3000", 3 * lam, 3 * B(phi, h2000) + C(phi, phi, phi))
    h2100 = solver.singular("2100", pair, B(phib, h2000) + 2 * B(phi, h1100) + C(phi, phi, phib), -2 * c1)
    h2000b, h2100b = h2000.conj(), h2100.conj()

    h2200 = solver.regular(
        "2200",
        2 * lam.real,
        2 * B(phib, h2100) + 2 * B(phi, h2100b) + B(h2000b, h2000) + 2 * B(h1100, h1100)
        + C(phi, phi, h2000b) + 4 * C(phi, phib, h1100) + C(phib, phib, h2000) + D(phi, phi, phib, phib),
    )
    w3100 = (
        B(phib, h3000) + 3 * B(phi, h2100) + 3 * B(h1100, h2000)
        + 3 * C(phi, phib, h2000) + 3 * C(phi, phi, h1100) + D(phi, phi, phi, phib)
    )
    h3100 = solver.regular("3100", 2 * lam, w3100 - 6 * c1 * h2000(0.0), -6 * c1 * h2000)

    c2 = complex(p @ (
        2 * B(phib, h3100) + 3 * B(phi, h2200) + B(h2000b, h3000) + 6 * B(h1100, h2100)
        + 3 * B(h2100b, h2000) + 6 * C(phib, h1100, h2000) + 6 * C(phi, phib, h2100)
        + C(phib, phib, h3000) + 3 * C(phi, phi, h2100b) + 3 * C(phi, h2000b, h2000)
        + 6 * C(phi, h1100, h1100) + D(phi, phi, phi, h2000b) + 6 * D(phi, phi, phib, h1100)
        + 3 * D(phi, phib, phib, h2000) + E(phi, phi, phi, phib, phib)
    ) / 12)

    gamma: Dict[str, complex] = {}
    for label, k in (("10", unfolding[0]), ("01", unfolding[1])):
        v = bundle.unit(k)
        h00 = solver.regular(f"00{label}", 0.0, bundle.J1(v))
        g1 = complex(p @ (A1(phi, v) + B(phi, h00)))
        h10 = solver.singular(f"10{label}", pair, A1(phi, v) + B(phi, h00), -g1)
        h10b = h10.conj()
        w20 = A1(h2000, v) + 2 * B(phi, h10) + B(h2000, h00) + B1(phi, phi, v) + C(phi, phi, h00)
        h20 = solver.regular(f"20{label}", 2 * lam, w20 - 2 * g1 * h2000(0.0), -2 * g1 * h2000)
        w11 = A1(h1100, v) + B(phib, h10) + B(phi, h10b) + B(h1100, h00) + B1(phi, phib, v) + C(phi, phib, h00)
        h11 = solver.regular(f"11{label}", 2 * lam.real, w11 - 2 * g1.real * h1100(0.0), -2 * g1.real * h1100)
        g2 = complex(0.5 * p @ (
            A1(h2100, v) + B(phib, h20) + 2 * B(phi, h11) + B(h2100, h00) + B(h2000, h10b)
            + 2 * B(h1100, h10) + B1(h2000, phib, v) + 2 * B1(phi, h1100, v) + 2 * C(phi, phib, h10)
            + C(h2000, phib, h00) + C(phi, phi, h10b) + 2 * C(phi, h1100, h00)
            + C1(phi, phi, phib, v) + D(phi, phi, phib, h00)
        ))
        gamma[f"gamma1{label}"] = g1
        gamma[f"gamma2{label}"] = g2

    G = np.array([
        [gamma["gamma110"], gamma["gamma101"]],
        [gamma["gamma210"], gamma["gamma201"]],
    ])
    K, cond = _invert_parameter_matrix(G.real, "genh")
    omega_row = (G[0] @ K).imag
    logger.info("genh: l1 = %.6g, l2 = %.6g", c1.real / pair.omega, c2.real / pair.omega)
    return GenHData(
        kind="genh",
        x=np.asarray(eq.x, dtype=float).copy(),
        alpha=np.asarray(eq.alpha, dtype=float).copy(),
        unfolding=unfolding,
        K=K,
        H=solver.H,
        residuals=solver.residuals,
        cond=cond,
        omega0=pair.omega,
        eigenpair=pair,
        c1=c1,
        c2=c2,
        gamma=gamma,
        omega10=float(omega_row[0]),
        omega01=float(omega_row[1]),
    )


# Fold-Hopf and transcritical-Hopf

def zeho_normal_form(model: DelayModel, pt: "CodimTwoPoint", unfolding: Optional[Sequence[int]] = None,
                     transcritical: Optional[bool] = None) -> ZeHoData:
    """
    Critical and parameter-related coefficients at a fold-Hopf point.

    With transcritical=True (default for thopf points) the parameter map is
    fixed by the transcritical solvability system instead of the orthogonal
    frame, and the equilibrium stays put.
    """
    _check_kind(pt, ("zeho", "thopf"))
    unfolding = _unfolding(pt, unfolding)
    if transcritical is None:
        transcritical = pt.kind == "thopf"
    eq = pt.equilibrium
    bundle = make_bundle(model, eq.x, eq.alpha, 3)
    solver = HomologicalSolver(bundle)
    lin = solver.lin
    B, C, A1 = bundle.B, bundle.C, bundle.A1
    zero, hopf = pt.eigenpairs
    p0, p1, q0 = zero.p, hopf.p, zero.q
    phi0, phi1 = solver.phi(zero), solver.phi(hopf)
    phi1b = phi1.conj()

    g200 = float((0.5 * p0 @ B(phi0, phi0)).real)
    g110 = complex(p1 @ B(phi0, phi1))
    g011 = float((p0 @ B(phi1, phi1b)).real)
    if abs(g200) < DEGENERACY_TOL or abs(g011) < DEGENERACY_TOL:
        raise Degenerate("g200 or g011 vanishes; theta and e are undefined", {"g200": g200, "g011": g011})

    h20000 = solver.singular("20000", zero, B(phi0, phi0), -2 * g200)
    h02000 = solver.regular("02000", 2 * hopf.lam, B(phi1, phi1))
    h11000 = solver.singular("11000", hopf, B(phi0, phi1), -g110)
    h01100 = solver.singular("01100", zero, B(phi1, phi1b), -g011)
    h11000b = h11000.conj()

    g300 = float((p0 @ (3 * B(phi0, h20000) + C(phi0, phi0, phi0)) / 6).real)
    g111 = float((p0 @ (B(phi0, h01100) + B(phi1, h11000b) + B(phi1b, h11000) + C(phi0, phi1, phi1b))).real)
    g210 = complex(0.5 * p1 @ (2 * B(phi0, h11000) + B(phi1, h20000) + C(phi0, phi0, phi1)))
    g021 = complex(0.5 * p1 @ (2 * B(phi1, h01100) + B(phi1b, h02000) + C(phi1, phi1, phi1b)))

    E = [bundle.unit(k) for k in unfolding]
    deltas: Tuple[float, ...] = ()
    frame = None
    if transcritical:
        G = np.array([
            [(p0 @ A1(phi0, E[0])).real, (p0 @ A1(phi0, E[1])).real],
            [(p1 @ A1(phi1, E[0])).real, (p1 @ A1(phi1, E[1])).real],
        ])
        K, cond = _invert_parameter_matrix(G, "transcritical-Hopf")
        omegas = [float((p1 @ A1(phi1, _embed(bundle, unfolding, K[:, j]))).imag) for j in range(2)]
    else:
        J1 = bundle.J1()[:, list(unfolding)]
        gvec = (p0 @ J1).real
        if np.linalg.norm(gvec) < DEGENERACY_TOL:
            raise SingularParameterMatrix("p0 J1 vanishes; the fold is not transversal", {"gamma": gvec})
        s1 = gvec / (gvec @ gvec)
        s2 = np.array([-gvec[1], gvec[0]])
        d0 = lin.delta(0.0)
        d1q0 = lin.delta_deriv(0.0, 1) @ q0
        xi = solve_bordered(d0, q0, p0, J1 @ s1 - d1q0)
        r13 = ExpPoly.term(0.0, xi, q0, span=lin.tau_max)
        r2 = ExpPoly.constant(solve_bordered(d0, q0, p0, J1 @ s2), span=lin.tau_max)
        S1, S2 = _embed(bundle, unfolding, s1), _embed(bundle, unfolding, s2)
        M = np.array([
            [(p0 @ (B(phi0, r2) + A1(phi0, S2))).real, 2 * g200],
            [(p1 @ (B(phi1, r2) + A1(phi1, S2))).real, g110.real],
        ])
        rhs = np.array([
            [-(p0 @ (A1(phi0, S1) + B(phi0, r13))).real, 0.0],
            [-(p1 @ (A1(phi1, S1) + B(phi1, r13))).real, 1.0],
        ])
        Minv, cond = _invert_parameter_matrix(M, "fold-Hopf")
        (d1, d2), (d3, d4) = Minv @ rhs
        deltas = (float(d1), float(d2), float(d3), float(d4))
        frame = (s1, s2)
        K = np.column_stack([s1 + d1 * s2, d2 * s2])
        h10 = r13 + d1 * r2 + ExpPoly.constant(d3 * q0, span=lin.tau_max)
        h01 = d2 * r2 + ExpPoly.constant(d4 * q0, span=lin.tau_max)
        solver.H["00010"], solver.H["00001"] = h10, h01
        omegas = []
        for j, h in enumerate((h10, h01)):
            Kj = _embed(bundle, unfolding, K[:, j])
            omegas.append(float((p1 @ (B(phi1, h) + A1(phi1, Kj))).imag))

    logger.info("%s: g200 = %.6g, g011 = %.6g, Re g110 = %.6g",
                "thopf" if transcritical else "zeho", g200, g011, g110.real)
    return ZeHoData(
        kind="thopf" if transcritical else "zeho",
        x=np.asarray(eq.x, dtype=float).copy(),
        alpha=np.asarray(eq.alpha, dtype=float).copy(),
        unfolding=unfolding,
        K=K,
        H=solver.H,
        residuals=solver.residuals,
        cond=cond,
        omega0=hopf.omega,
        eigenpairs=(zero, hopf),
        g200=g200,
        g011=g011,
        g300=g300,
        g111=g111,
        g110=g110,
        g210=g210,
        g021=g021,
        omega1=omegas[0],
        omega2=omegas[1],
        deltas=deltas,
        frame=frame,
        transcritical=transcritical,
    )


# Hopf-Hopf

def hoho_normal_form(model: DelayModel, pt: "CodimTwoPoint", unfolding: Optional[Sequence[int]] = None) -> HoHoData:
    _check_kind(pt, ("hoho",))
    unfolding = _unfolding(pt, unfolding)
    eq = pt.equilibrium
    bundle = make_bundle(model, eq.x, eq.alpha, 3)
    solver = HomologicalSolver(bundle)
    B, C, A1 = bundle.B, bundle.C, bundle.A1
    first, second = pt.eigenpairs
    if first.omega < second.omega:
        first, second = second, first
    l1, l2 = first.lam, second.lam
    phi1, phi2 = solver.phi(first), solver.phi(second)
    phi1b, phi2b = phi1.conj(), phi2.conj()

    h110000 = solver.regular("110000", l1 + l1.conjugate(), B(phi1, phi1b))
    h200000 = solver.regular("200000", 2 * l1, B(phi1, phi1))
    h101000 = solver.regular("101000", l1 + l2, B(phi1, phi2))
    h001100 = solver.regular("001100", l2 + l2.conjugate(), B(phi2, phi2b))
    h100100 = solver.regular("100100", l1 + l2.conjugate(), B(phi1, phi2b))
    h002000 = solver.regular("002000", 2 * l2, B(phi2, phi2))

    p1, p2 = first.p, second.p
    g2100 = complex(0.5 * p1 @ (2 * B(phi1, h110000) + B(phi1b, h200000) + C(phi1, phi1, phi1b)))
    g1011 = complex(p1 @ (B(phi2b, h101000) + B(phi1, h001100) + B(phi2, h100100) + C(phi1, phi2, phi2b)))
    g1110 = complex(p2 @ (B(phi1b, h101000) + B(phi1, h100100.conj()) + B(phi2, h110000) + C(phi1, phi1b, phi2)))
    g0021 = complex(0.5 * p2 @ (2 * B(phi2, h001100) + B(phi2b, h002000) + C(phi2, phi2, phi2b)))

    lin = solver.lin
    pairs = (first, second)
    phis = (phi1, phi2)
    units = [bundle.unit(k) for k in unfolding]
    static = [ExpPoly.constant(linalg.solve(lin.delta(0.0), bundle.J1(e)), span=lin.tau_max) for e in units]
    Gamma = np.array([
        [complex(pairs[i].p @ (A1(phis[i], units[j]) + B(phis[i], static[j]))) for j in range(2)]
        for i in range(2)
    ])
    K, cond = _invert_parameter_matrix(Gamma.real, "Hopf-Hopf")
    for j, label in enumerate(("000010", "000001")):
        solver.H[label] = K[0, j] * static[0] + K[1, j] * static[1]
    b = (Gamma @ K).imag

    logger.info("hoho: omega1 = %.6g, omega2 = %.6g", first.omega, second.omega)
    return HoHoData(
        kind="hoho",
        x=np.asarray(eq.x, dtype=float).copy(),
        alpha=np.asarray(eq.alpha, dtype=float).copy(),
        unfolding=unfolding,
        K=K,
        H=solver.H,
        residuals=solver.residuals,
        cond=cond,
        omega1=first.omega,
        omega2=second.omega,
        eigenpairs=(first, second),
        g2100=g2100,
        g1011=g1011,
        g1110=g1110,
        g0021=g0021,
        Gamma=Gamma,
        b=b,
    )


def normal_form(model: DelayModel, pt: "CodimTwoPoint", unfolding: Optional[Sequence[int]] = None):
    """Dispatch on pt.kind"""
    if pt.kind == "genh":
        return genh_normal_form(model, pt, unfolding)
    if pt.kind in ("zeho", "thopf"):
        return zeho_normal_form(model, pt, unfolding)
    if pt.kind == "hoho":
        return hoho_normal_form(model, pt, unfolding)
    raise InvalidInput(f"unknown codimension-two kind '{pt.kind}'")
