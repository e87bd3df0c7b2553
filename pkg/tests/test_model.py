"""
Tests for the model layer: rhs evaluation, derivative oracles and multilinear forms
"""

from dataclasses import replace

import numpy as np
import pytest
import sympy as sp

from ddenorm.errors import DDENormError, InvalidInput, NotAnEquilibrium, UnknownModel
from ddenorm.model import (
    FiniteDifferenceOracle,
    eval_rhs,
    fd_derivative,
    linearize,
    make_bundle,
    symmetry_defect,
)
from ddenorm.points import correct_equilibrium
from ddenorm.systems import (
    RH_CONSTANTS,
    get_model,
    list_models,
    rh_bifurcation_values,
    symbolic_model,
)

MODEL_NAMES = ["fhn", "rose_hindmarsh", "acs", "vdp", "scalar"]


def _cube_model():
    return symbolic_model("cube", 1, ("a",), 0, lambda a: [0.0], lambda X, P: [X[0][0] ** 3])


def _sine_model():
    return symbolic_model("sine", 1, ("a",), 0, lambda a: [0.0], lambda X, P: [sp.sin(X[0][0])])


def _random_point(model, rng):
    ex = next(iter(model.examples.values()))
    alpha = np.asarray(ex["parameters"], dtype=float)
    taus = model.delay_values(alpha)
    X = np.asarray(ex["state"], dtype=float)[:, None] + 0.1 * rng.standard_normal((model.n, taus.size))
    return X, alpha


# Registry

def test_get_model_unknown_name():
    with pytest.raises(UnknownModel) as info:
        get_model("lorenz")
    assert "fhn" in info.value.details["available"]


def test_list_models_reports_examples():
    listing = {entry["name"]: entry for entry in list_models()}
    assert set(listing) == set(MODEL_NAMES)
    assert listing["fhn"]["delay_parameters"] == ["tau"]
    assert listing["vdp"]["fixed_equilibrium"] is True
    assert listing["acs"]["time_rescaled"] is True
    assert "set2" in listing["rose_hindmarsh"]["examples"]


def test_error_serializes_details():
    err = InvalidInput("bad", {"value": np.float64(1.5), "z": 1 + 2j})
    doc = err.to_dict()
    assert doc["kind"] == "InvalidInput"
    assert isinstance(err, ValueError) and isinstance(err, DDENormError)
    assert doc["details"]["value"] == 1.5


# rhs evaluation

def test_eval_rhs_shape_checks(fhn):
    alpha = np.array(fhn.examples["hopf"]["parameters"])
    with pytest.raises(InvalidInput):
        eval_rhs(fhn, np.zeros((2, 3)), alpha)
    with pytest.raises(InvalidInput):
        eval_rhs(fhn, np.zeros((2, 2)), alpha[:2])
    assert eval_rhs(fhn, np.zeros((2, 2)), alpha) == pytest.approx([0.0, 0.0])


def test_delays_must_increase():
    model = symbolic_model("bad", 1, ("a",), 1, lambda a: [0.0, -1.0], lambda X, P: [X[0][1]])
    with pytest.raises(InvalidInput):
        model.delay_values(np.zeros(1))


# Finite differences

def test_fd_third_derivative_of_cube():
    model = _cube_model()
    value = fd_derivative(model, (np.zeros((1, 1)), np.zeros(1)), 3, (np.ones((1, 1)), np.zeros(1)))
    assert value[0] == pytest.approx(6.0, abs=1e-4)


def test_fd_second_derivative_of_sine_vanishes():
    model = _sine_model()
    value = fd_derivative(model, (np.zeros((1, 1)), np.zeros(1)), 2, (np.ones((1, 1)), np.zeros(1)))
    assert abs(value[0]) < 1e-6


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_symbolic_first_derivative_matches_fd(name, rng):
    model = get_model(name)
    fd = FiniteDifferenceOracle(model)
    for _ in range(5):
        X, alpha = _random_point(model, rng)
        U = rng.standard_normal(X.shape)
        exact = model.deriv_oracle.form(X, alpha, [U], []).real
        approx = fd.form(X, alpha, [U], []).real
        assert np.linalg.norm(exact - approx) <= 1e-6 * max(1.0, np.linalg.norm(exact))


@pytest.mark.parametrize("name", MODEL_NAMES)
@pytest.mark.parametrize("r,s", [(2, 0), (3, 0), (1, 1), (0, 2)])
def test_symbolic_forms_match_fd(name, r, s, rng):
    model = get_model(name)
    fd = FiniteDifferenceOracle(model)
    X, alpha = _random_point(model, rng)
    U = [rng.standard_normal(X.shape) for _ in range(r)]
    V = [rng.standard_normal(model.p) for _ in range(s)]
    exact = model.deriv_oracle.form(X, alpha, U, V).real
    approx = fd.form(X, alpha, U, V).real
    assert np.linalg.norm(exact - approx) <= 1e-5 * max(1.0, np.linalg.norm(exact))


# Linearization and bundle

def test_scalar_linearization(scalar_model):
    lin = linearize(scalar_model, np.zeros(1), np.array([np.pi / 2]))
    assert lin.taus == pytest.approx([0.0, 1.0])
    assert lin.mats[0, 0, 0] == pytest.approx(0.0)
    assert lin.mats[1, 0, 0] == pytest.approx(-np.pi / 2)


def test_make_bundle_rejects_non_equilibrium(fhn):
    alpha = np.array(fhn.examples["hopf"]["parameters"])
    with pytest.raises(NotAnEquilibrium):
        make_bundle(fhn, np.array([0.5, 0.5]), alpha)


def test_make_bundle_rejects_order(fhn):
    alpha = np.array(fhn.examples["hopf"]["parameters"])
    with pytest.raises(InvalidInput):
        make_bundle(fhn, np.zeros(2), alpha, max_order=6)


@pytest.mark.parametrize("name", ["fhn", "rose_hindmarsh", "acs", "vdp"])
def test_bundle_forms_are_symmetric(name, rng):
    model = get_model(name)
    ex = next(iter(model.examples.values()))
    eq = correct_equilibrium(model, ex["parameters"], ex["state"])
    bundle = make_bundle(model, eq.x, eq.alpha)
    for r in (2, 3, 4, 5):
        args = [rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n) for _ in range(r)]
        assert symmetry_defect(bundle, r, 0, args) < 1e-10
    args = [rng.standard_normal(model.n) for _ in range(2)] + [rng.standard_normal(model.p)]
    assert symmetry_defect(bundle, 2, 1, args) < 1e-10


def test_bundle_cubic_form_matches_fd(fhn, rng):
    ex = fhn.examples["genh"]
    eq = correct_equilibrium(fhn, ex["parameters"], ex["state"])
    bundle = make_bundle(fhn, eq.x, eq.alpha)
    fd_bundle = make_bundle(replace(fhn, deriv_oracle=None), eq.x, eq.alpha)
    u, v, w = (rng.standard_normal(2) for _ in range(3))
    exact, approx = bundle.C(u, v, w), fd_bundle.C(u, v, w)
    assert np.linalg.norm(exact - approx) <= 1e-6 * max(1.0, np.linalg.norm(exact))


def test_mixed_form_matches_parameter_derivative(fhn, rng):
    ex = fhn.examples["hopf"]
    eq = correct_equilibrium(fhn, ex["parameters"], ex["state"])
    bundle = make_bundle(fhn, eq.x, eq.alpha)
    u = rng.standard_normal(2)
    for k in range(fhn.p):
        e_k = np.zeros(fhn.p)
        e_k[k] = 1.0
        h = 1e-5
        plus = linearize(fhn, eq.x, eq.alpha + h * e_k)
        minus = linearize(fhn, eq.x, eq.alpha - h * e_k)
        samples = fhn.samples(u, eq.alpha)
        fd = (plus.lag_apply(samples) - minus.lag_apply(samples)) / (2 * h)
        assert np.linalg.norm(bundle.A1(u, e_k).real - fd) <= 1e-6 * max(1.0, np.linalg.norm(fd))


# Rose-Hindmarsh bifurcation values

def test_rh_bifurcation_values_set1():
    c = RH_CONSTANTS
    v = rh_bifurcation_values(c["a"], c["b"], c["c"], c["d"], c["chi"], 0.001, -0.57452592)
    assert round(v["x"], 4) == pytest.approx(0.1308)
    assert v["tau"] == pytest.approx(5.768830916, abs=5e-9)


def test_rh_bifurcation_values_set2():
    c = RH_CONSTANTS
    v = rh_bifurcation_values(c["a"], c["b"], c["c"], c["d"], c["chi"], 1.4, -8.0)
    assert round(v["x"], 4) == pytest.approx(1.0972)
    assert round(v["tau"], 4) == pytest.approx(0.9402)
    assert v["omega"] == pytest.approx(5.6042, abs=1e-3)


def test_rh_examples_are_equilibria(rh):
    for ex in rh.examples.values():
        alpha = np.array(ex["parameters"])
        residual = eval_rhs(rh, rh.samples(np.array(ex["state"]), alpha), alpha)
        assert np.linalg.norm(residual) < 1e-9
