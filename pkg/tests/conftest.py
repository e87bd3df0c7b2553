"""
Shared fixtures - built-in models and the worked example points

The codimension-two points are corrected once per test module; they are the
expensive part of the suite.
"""

import numpy as np
import pytest

from ddenorm.nmfm import genh_normal_form, hoho_normal_form, zeho_normal_form
from ddenorm.points import (
    classify_codim2,
    correct_codim2,
    correct_equilibrium,
    correct_hopf,
    hopf_from_equilibrium,
)
from ddenorm.systems import get_model, symbolic_model


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow continuation/simulation tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long continuation or simulation run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ODE oracles wrapped as delay-free models

def planar_genh_model(c: float = 0.7, D: float = -0.3):
    """w' = (a1 + i) w + (a2 + i c) w |w|^2 + D w |w|^4 in real coordinates"""

    def build(X, P):
        a1, a2 = P
        x, y = X[0][0], X[1][0]
        r2 = x ** 2 + y ** 2
        return [
            a1 * x - y + (a2 * x - c * y) * r2 + D * x * r2 ** 2,
            x + a1 * y + (c * x + a2 * y) * r2 + D * y * r2 ** 2,
        ]

    return symbolic_model("planar_genh", 2, ("a1", "a2"), 0, lambda a: [0.0], build)


def decoupled_hopf_model(omegas=(1.0, np.sqrt(5.0)), cubic=((-1.0, 0.5), (-2.0, -0.25))):
    """Two uncoupled Hopf oscillators w_k' = (mu_k + i omega_k) w_k + c_k w_k |w_k|^2"""

    def build(X, P):
        exprs = []
        for k, (mu, omega, (re, im)) in enumerate(zip(P, omegas, cubic)):
            x, y = X[2 * k][0], X[2 * k + 1][0]
            r2 = x ** 2 + y ** 2
            exprs.append(mu * x - omega * y + (re * x - im * y) * r2)
            exprs.append(omega * x + mu * y + (im * x + re * y) * r2)
        return exprs

    return symbolic_model("decoupled_hopf", 4, ("mu1", "mu2"), 0, lambda a: [0.0], build)


@pytest.fixture(scope="module")
def planar_genh():
    model = planar_genh_model()
    eq = correct_equilibrium(model, [0.0, 0.0], [0.0, 0.0])
    pt = classify_codim2(model, eq, (0, 1), expect="genh")
    return model, pt


@pytest.fixture(scope="module")
def decoupled_hopf():
    model = decoupled_hopf_model()
    eq = correct_equilibrium(model, [0.0, 0.0], np.zeros(4))
    return model, classify_codim2(model, eq, (0, 1), expect="hoho")


@pytest.fixture(scope="module")
def scalar_model():
    return get_model("scalar")


# Worked examples

@pytest.fixture(scope="module")
def fhn():
    return get_model("fhn")


@pytest.fixture(scope="module")
def fhn_hopf(fhn):
    ex = fhn.examples["hopf"]
    eq = correct_equilibrium(fhn, ex["parameters"], ex["state"])
    return correct_hopf(fhn, hopf_from_equilibrium(fhn, eq, ex["omega"]), 1)


@pytest.fixture(scope="module")
def fhn_hopf_nmfm(fhn, fhn_hopf):
    pt = classify_codim2(fhn, fhn_hopf, (0, 1), expect="genh")
    return genh_normal_form(fhn, pt)


@pytest.fixture(scope="module")
def fhn_genh_nmfm(fhn):
    ex = fhn.examples["genh"]
    eq = correct_equilibrium(fhn, ex["parameters"], ex["state"])
    hopf = correct_hopf(fhn, hopf_from_equilibrium(fhn, eq, ex["omega"]), 0)
    pt = classify_codim2(fhn, hopf, (0, 1), expect="genh")
    return genh_normal_form(fhn, pt)


@pytest.fixture(scope="module")
def rh():
    return get_model("rose_hindmarsh")


def _zeho_point(model, example):
    ex = model.examples[example]
    eq = correct_equilibrium(model, ex["parameters"], ex["state"])
    return correct_codim2(model, eq, "zeho", (0, 1), omegas=[ex["omega"]])


@pytest.fixture(scope="module")
def rh_set1(rh):
    pt = _zeho_point(rh, "set1")
    return pt, zeho_normal_form(rh, pt)


@pytest.fixture(scope="module")
def rh_set2(rh):
    pt = _zeho_point(rh, "set2")
    return pt, zeho_normal_form(rh, pt)


@pytest.fixture(scope="module")
def acs():
    return get_model("acs")


@pytest.fixture(scope="module")
def acs_hoho(acs):
    ex = acs.examples["hoho"]
    eq = correct_equilibrium(acs, ex["parameters"], ex["state"])
    pt = correct_codim2(acs, eq, "hoho", (0, 1), omegas=ex["omegas"])
    return pt, hoho_normal_form(acs, pt)


@pytest.fixture(scope="module")
def vdp():
    return get_model("vdp")


@pytest.fixture(scope="module")
def vdp_thopf(vdp):
    ex = vdp.examples["thopf"]
    eq = correct_equilibrium(vdp, ex["parameters"], ex["state"])
    pt = correct_codim2(vdp, eq, "thopf", (0, 1), omegas=[ex["omega"]])
    return pt, zeho_normal_form(vdp, pt)
