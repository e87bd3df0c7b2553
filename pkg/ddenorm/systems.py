"""
Built-in delay models

FitzHugh-Nagumo with delayed coupling, Rose-Hindmarsh with delayed
self-feedback, an active control system (time-rescaled), a delayed Van der
Pol oscillator (time-rescaled, fixed trivial equilibrium) and the scalar test
equation x' = -k x(t - 1).
"""

import math
from typing import Callable, Dict, List, Sequence

import numpy as np
import sympy as sp

from ddenorm.errors import NoBifurcation, UnknownModel
from ddenorm.model import DelayModel, SymbolicOracle


def symbolic_model(
    name: str,
    n: int,
    parameter_names: Sequence[str],
    n_lags: int,
    delays: Callable[[np.ndarray], Sequence[float]],
    build: Callable[[List[List[sp.Symbol]], List[sp.Symbol]], List[sp.Expr]],
    **kwargs,
) -> DelayModel:
    """Wrap a sympy right-hand side into a DelayModel with closed-form derivatives"""
    X = [[sp.Symbol(f"x{i}_{j}", real=True) for j in range(n_lags + 1)] for i in range(n)]
    P = [sp.Symbol(f"p{k}", real=True) for k in range(len(parameter_names))]
    oracle = SymbolicOracle(build(X, P), X, P)
    return DelayModel(
        name=name,
        n=n,
        parameter_names=tuple(parameter_names),
        delays=delays,
        rhs=oracle.rhs,
        deriv_oracle=oracle,
        **kwargs,
    )


# FitzHugh-Nagumo

FHN_CONSTANTS = {"b": 0.9, "eps": 0.08, "c": 2.0528, "d": -3.2135}


def fitzhugh_nagumo() -> DelayModel:
    k = FHN_CONSTANTS

    def build(X, P):
        beta, alpha, _tau = P
        u1, u1_tau, u2 = X[0][0], X[0][1], X[1][0]
        return [
            -u1 ** 3 / 3 + (k["c"] + alpha) * u1 ** 2 + k["d"] * u1 - u2 + 2 * beta * sp.tanh(u1_tau),
            k["eps"] * (u1 - k["b"] * u2),
        ]

    return symbolic_model(
        "fhn",
        2,
        ("beta", "alpha", "tau"),
        1,
        lambda a: [0.0, a[2]],
        build,
        delay_parameters=(2,),
        description="FitzHugh-Nagumo neurons with delayed tanh coupling",
        examples={
            "hopf": {"parameters": [1.9, -0.9710, 1.7722], "state": [0.0, 0.0], "omega": 0.0720},
            "genh": {"parameters": [1.9, -1.0429, 1.7722], "state": [0.0, 0.0], "omega": 0.0720},
        },
    )


# Rose-Hindmarsh

RH_CONSTANTS = {"a": 1.0, "b": 3.0, "c": 1.0, "d": 5.0, "chi": -1.6}


def rh_bifurcation_values(a: float, b: float, c: float, d: float, chi: float, r: float, S: float) -> Dict[str, float]:
    """
    Fold-Hopf locus of the Rose-Hindmarsh model for given (r, S)

    Returns:
        x*, the equilibrium (x*, y*, z*), I_app, omega and tau; omega is the
        smallest admissible frequency and tau the first positive delay.
    """
    disc = (b - d) ** 2 - 3 * a * c * S
    if disc < 0:
        raise NoBifurcation("no real equilibrium branch point", {"discriminant": disc})
    x = (b - d + math.sqrt(disc)) / (3 * a)
    i_app = x ** 2 * (a * x - b + d) + c * (S * (x - chi) - 1)
    A = (
        x ** 2 * ((3 * a * x + 2 * d) ** 2 - 4 * b ** 2)
        - 2 * r * x * (2 * d * x - 1) * (3 * a * x - 2 * b + 2 * d)
        + r ** 2 * (4 * d * x * (-2 * b * x + d * x - 1) + 1)
    )
    B = 9 * a ** 2 * x ** 4 + 2 * r * x * (3 * a * x - 2 * b + 2 * d) - 4 * b ** 2 * x ** 2 - 4 * d * x + r ** 2 + 1
    root_disc = B ** 2 - 4 * A
    if root_disc < 0:
        raise NoBifurcation("no imaginary characteristic pair", {"B2-4A": root_disc})
    squares = [(-B - math.sqrt(root_disc)) / 2, (-B + math.sqrt(root_disc)) / 2]
    admissible = [w2 for w2 in squares if w2 > 0]
    if not admissible:
        raise NoBifurcation("no positive frequency", {"omega_squared": squares})
    omega = math.sqrt(min(admissible))
    w2 = omega ** 2
    Y = omega / (2 * b) * (r * (2 * b - 2 * d - 3 * a * x) / (r ** 2 + w2) + 2 * d / (w2 + 1) - 1 / x)
    Z = omega / (2 * b) * (r ** 2 * (2 * b - 2 * d - 3 * a * x) / (r ** 2 + w2) + 2 * d / (w2 + 1) + 3 * a * x)
    if abs(Y) > 1:
        raise NoBifurcation("delay equation has no solution", {"Y": Y})
    base = math.asin(Y) if Z >= 0 else math.pi - math.asin(Y)
    k = 0
    while (base + 2 * k * math.pi) / omega <= 0:
        k += 1
    tau = (base + 2 * k * math.pi) / omega
    return {
        "x": x,
        "y": c - d * x ** 2,
        "z": S * (x - chi),
        "I_app": i_app,
        "omega": omega,
        "tau": tau,
        "omega_alt": math.sqrt(max(admissible)),
    }


def rose_hindmarsh() -> DelayModel:
    k = RH_CONSTANTS

    def build(X, P):
        i_app, S, r, _tau = P
        x, x_tau, y, z = X[0][0], X[0][1], X[1][0], X[2][0]
        return [
            y - k["a"] * x ** 3 + k["b"] * x_tau ** 2 - k["c"] * z + i_app,
            k["c"] - k["d"] * x ** 2 - y,
            r * (S * (x - k["chi"]) - z),
        ]

    examples = {}
    for label, (r, S) in {"set1": (0.001, -0.57452592), "set2": (1.4, -8.0)}.items():
        v = rh_bifurcation_values(k["a"], k["b"], k["c"], k["d"], k["chi"], r, S)
        examples[label] = {
            "parameters": [v["I_app"], S, r, v["tau"]],
            "state": [v["x"], v["y"], v["z"]],
            "omega": v["omega"],
        }
    return symbolic_model(
        "rose_hindmarsh",
        3,
        ("I_app", "S", "r", "tau"),
        1,
        lambda a: [0.0, a[3]],
        build,
        delay_parameters=(3,),
        description="Rose-Hindmarsh burster with delayed self-feedback",
        examples=examples,
    )


# Active control system, time rescaled to unit delay

ACS_CONSTANTS = {"gu": 0.1, "gv": 0.52, "beta": 0.1}


def active_control() -> DelayModel:
    k = ACS_CONSTANTS

    def build(X, P):
        zeta, tau = P
        x, x_1, y, y_1 = X[0][0], X[0][1], X[1][0], X[1][1]
        return [
            tau * y,
            tau * (-x - k["gu"] * x_1 - 2 * zeta * y - k["gv"] * y_1 + k["beta"] * x_1 ** 3),
        ]

    return symbolic_model(
        "acs",
        2,
        ("zeta", "tau"),
        1,
        lambda a: [0.0, 1.0],
        build,
        time_rescaled=True,
        description="Active control system with delayed feedback (delay rescaled to 1)",
        examples={
            "hoho": {"parameters": [-0.016225, 5.89802], "state": [0.0, 0.0], "omegas": [7.6449, 4.5275]},
        },
    )


# Delayed Van der Pol oscillator, time rescaled to unit delay

VDP_CONSTANTS = {"eps": 0.3, "tau0": 1.757290761249588}


def van_der_pol() -> DelayModel:
    k = VDP_CONSTANTS

    def build(X, P):
        mu1, mu2 = P
        x, x_1, y, y_1 = X[0][0], X[0][1], X[1][0], X[1][1]
        scale = k["tau0"] + mu2
        return [
            scale * y,
            scale * (
                -k["eps"] * (x ** 2 - 1) * y
                - x
                + (1 + mu1) * x_1
                - sp.Rational(1, 5) * y_1
                - sp.Rational(1, 5) * x_1 ** 2
                - sp.Rational(1, 5) * x_1 * y_1
                - sp.Rational(1, 5) * y_1 ** 2
                + sp.Rational(1, 2) * x_1 ** 3
            ),
        ]

    return symbolic_model(
        "vdp",
        2,
        ("mu1", "mu2"),
        1,
        lambda a: [0.0, 1.0],
        build,
        time_rescaled=True,
        fixed_equilibrium=True,
        description="Delayed Van der Pol oscillator (delay rescaled to 1, trivial equilibrium fixed)",
        examples={"thopf": {"parameters": [0.0, 0.0], "state": [0.0, 0.0], "omega": 2.4539}},
    )


def scalar_delay() -> DelayModel:
    def build(X, P):
        (gain,) = P
        return [-gain * X[0][1]]

    return symbolic_model(
        "scalar",
        1,
        ("k",),
        1,
        lambda a: [0.0, 1.0],
        build,
        description="x' = -k x(t - 1); purely imaginary roots at k = pi/2",
        examples={"hopf": {"parameters": [math.pi / 2], "state": [0.0], "omega": math.pi / 2}},
    )


MODEL_FACTORIES: Dict[str, Callable[[], DelayModel]] = {
    "fhn": fitzhugh_nagumo,
    "rose_hindmarsh": rose_hindmarsh,
    "acs": active_control,
    "vdp": van_der_pol,
    "scalar": scalar_delay,
}

_cache: Dict[str, DelayModel] = {}


def get_model(name: str) -> DelayModel:
    """
    Get a built-in model by name

    Args:
        name: registry key, see MODEL_FACTORIES

    Returns:
        The (cached) DelayModel instance
    """
    if name not in MODEL_FACTORIES:
        raise UnknownModel(f"Unknown model: {name}", {"available": sorted(MODEL_FACTORIES)})
    if name not in _cache:
        _cache[name] = MODEL_FACTORIES[name]()
    return _cache[name]


def list_models() -> List[dict]:
    listing = []
    for name in sorted(MODEL_FACTORIES):
        model = get_model(name)
        listing.append({
            "name": name,
            "n": model.n,
            "parameters": list(model.parameter_names),
            "delay_parameters": [model.parameter_names[i] for i in model.delay_parameters],
            "time_rescaled": model.time_rescaled,
            "fixed_equilibrium": model.fixed_equilibrium,
            "description": model.description,
            "examples": model.examples,
        })
    return listing
