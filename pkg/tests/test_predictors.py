"""
Tests for the curve predictors emanating from codimension-two points
"""

from dataclasses import replace

import numpy as np
import pytest

from ddenorm.errors import DegenerateL2
from ddenorm.points import Equilibrium, correct_fold, correct_hopf, fold_from_equilibrium, hopf_from_equilibrium
from ddenorm.predictors import (
    default_eps_grid,
    genh_predictors,
    hoho_predictors,
    predictors_for,
    residual_order,
    thopf_predictors,
    zeho_predictors,
)
from ddenorm.schemas import validate
from ddenorm.storage import metadata, to_json_value


def _order_ok(predictor) -> bool:
    order = predictor.residual_order
    return np.isinf(order) or order >= predictor.claimed_order - 0.2


def test_eps_grid():
    grid = default_eps_grid()
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(1e-1)
    assert grid.size == 61


def test_residual_order_fit():
    eps = np.logspace(-3, -1, 21)
    assert residual_order(lambda e: 3.0 * e ** 3, eps) == pytest.approx(3.0, abs=1e-8)
    assert np.isinf(residual_order(lambda e: 0.0, eps))


# Residual orders on every worked example

@pytest.mark.parametrize("fixture", ["fhn_hopf_nmfm", "fhn_genh_nmfm"])
def test_genh_residual_orders(fixture, request):
    data = request.getfixturevalue(fixture)
    predictors = genh_predictors(data)
    assert set(predictors.predictors) == {"lpc", "hopf"}
    for predictor in predictors.predictors.values():
        assert _order_ok(predictor), predictor.kind


@pytest.mark.parametrize("fixture", ["rh_set1", "rh_set2"])
def test_zeho_residual_orders(fixture, request):
    _, data = request.getfixturevalue(fixture)
    predictors = zeho_predictors(data)
    assert {"fold", "hopf"} <= set(predictors.predictors)
    for predictor in predictors.predictors.values():
        assert _order_ok(predictor), predictor.kind
    assert np.isinf(predictors["fold"].residual_order)


def test_thopf_residual_orders(vdp_thopf):
    _, data = vdp_thopf
    predictors = predictors_for(data)
    assert predictors.source == "thopf"
    assert set(predictors.predictors) == {"transcritical", "hopf1", "hopf2", "ns_plus", "ns_minus"}
    for predictor in predictors.predictors.values():
        assert _order_ok(predictor), predictor.kind


def test_hoho_residual_orders(acs_hoho):
    _, data = acs_hoho
    predictors = hoho_predictors(data)
    for predictor in predictors.predictors.values():
        assert np.isinf(predictor.residual_order), predictor.kind


# Explicit values

def test_lpc_parameters(fhn_genh_nmfm):
    data = replace(fhn_genh_nmfm, c2=-1.0 + 0.3j)
    point = genh_predictors(data, [0.1])["lpc"].at(0.1)
    assert point.beta == pytest.approx([-1e-4, 0.02])
    assert point.alpha == pytest.approx(data.alpha_of([-1e-4, 0.02]))
    assert point.cycle.period == pytest.approx(2 * np.pi / point.omega)


def test_lpc_only_positive_eps(fhn_genh_nmfm):
    predictors = genh_predictors(fhn_genh_nmfm, [-0.01, 0.01])
    assert [p.eps for p in predictors["lpc"].points] == [0.01]
    assert len(predictors["hopf"].points) == 2


def test_lpc_requires_nonzero_l2(fhn_genh_nmfm):
    with pytest.raises(DegenerateL2):
        genh_predictors(replace(fhn_genh_nmfm, c2=0.5j))


def test_hoho_ns1_parameters(acs_hoho):
    _, data = acs_hoho
    point = hoho_predictors(data, [0.1])["ns1"].at(0.1)
    assert point.beta == pytest.approx([-data.g2100.real * 0.01, -data.g1110.real * 0.01])
    assert point.beta == pytest.approx([0.000915, -0.002151], abs=2e-5)
    assert point.cycle.profile.shape == (128, data.x.size)


def test_thopf_ns_slope(vdp_thopf):
    _, data = vdp_thopf
    predictors = thopf_predictors(data, [0.05])
    for label in ("ns_plus", "ns_minus"):
        beta = predictors[label].points[0].beta
        assert beta[1] / beta[0] == pytest.approx(-0.3152, abs=1e-3)
    # the two branches lie on opposite sides of the transcritical line
    assert predictors["ns_plus"].points[0].beta[0] * predictors["ns_minus"].points[0].beta[0] < 0


def test_zeho_hopf_parameters(rh_set2):
    _, data = rh_set2
    point = zeho_predictors(data, [1e-3])["hopf"].at(1e-3)
    assert point.beta[1] == pytest.approx(1e-3)
    assert point.beta[0] == pytest.approx(-data.g200 / data.g110.real ** 2 * 1e-6)
    assert point.cycle is None


# Predicted points as Newton guesses

def _held_fixed(predictor, unfolding, eps):
    """Correct in the unfolding parameter along which the curve moves least"""
    tangent = predictor.at(2 * eps).alpha - predictor.at(eps).alpha
    return unfolding[int(np.argmin(np.abs(tangent[list(unfolding)])))]


def _corrected_iterations(model, predictor, unfolding, eps=1e-2):
    point = predictor.at(eps)
    eq = Equilibrium(point.x.copy(), point.alpha.copy(), 0.0)
    free = _held_fixed(predictor, unfolding, eps)
    if predictor.kind == "fold":
        return correct_fold(model, fold_from_equilibrium(model, eq), free).iterations
    return correct_hopf(model, hopf_from_equilibrium(model, eq, point.omega), free).iterations


def test_zeho_predictions_correct_quickly(rh, rh_set2):
    _, data = rh_set2
    predictors = zeho_predictors(data, [1e-2])
    for kind in ("fold", "hopf"):
        assert _corrected_iterations(rh, predictors[kind], data.unfolding) <= 5


def test_genh_hopf_prediction_corrects_quickly(fhn, fhn_genh_nmfm):
    predictor = genh_predictors(fhn_genh_nmfm, [1e-2])["hopf"]
    assert _corrected_iterations(fhn, predictor, fhn_genh_nmfm.unfolding) <= 5


def test_thopf_hopf_predictions_correct_quickly(vdp, vdp_thopf):
    _, data = vdp_thopf
    predictors = thopf_predictors(data, [1e-2])
    for kind in ("hopf1", "hopf2"):
        assert _corrected_iterations(vdp, predictors[kind], data.unfolding) <= 5


# Exclusions

def test_ns_excluded_without_torus(rh_set1):
    _, data = rh_set1
    flipped = replace(data, g011=-data.g011)
    predictors = zeho_predictors(flipped)
    assert "ns" not in predictors
    assert predictors.excluded["ns"]["kind"] == "TorusAbsent"


def test_thopf_ns_excluded_without_torus(vdp_thopf):
    _, data = vdp_thopf
    predictors = thopf_predictors(replace(data, g011=-data.g011))
    assert "ns_plus" not in predictors and "ns_minus" not in predictors
    assert predictors.excluded["ns_plus"]["kind"] == "TorusAbsent"
    assert "hopf1" in predictors


def test_zeho_hopf_excluded_when_degenerate(rh_set2):
    _, data = rh_set2
    predictors = zeho_predictors(replace(data, g110=complex(0.0, data.g110.imag)))
    assert "hopf" not in predictors
    assert predictors.excluded["hopf"]["kind"] == "Degenerate"


def test_torus_note(rh_set2):
    _, data = rh_set2
    notes = zeho_predictors(data).notes
    assert notes["torus"] == "stable torus"


def test_predictors_for_rejects_base_type():
    with pytest.raises(TypeError):
        predictors_for(object())


# Documents

def test_predictors_document(acs_hoho):
    _, data = acs_hoho
    doc = to_json_value({**hoho_predictors(data).to_dict(with_profile=False), "metadata": metadata(command="predict")})
    validate("predictors", doc)
    assert doc["predictors"]["hopf1"]["residual_order"] == "exact"
    assert "profile" not in doc["predictors"]["ns1"]["points"][0]
