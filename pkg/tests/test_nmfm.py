"""
Tests for the normal-form coefficients at codimension-two points
"""

from dataclasses import replace

import numpy as np
import pytest

from ddenorm.errors import InconsistentSystem, InvalidInput
from ddenorm.model import make_bundle
from ddenorm.nmfm import (
    RESIDUAL_TOL,
    first_lyapunov,
    genh_normal_form,
    hoho_normal_form,
    normal_form,
    zeho_normal_form,
)
from ddenorm.points import classify_codim2, correct_equilibrium
from ddenorm.schemas import validate
from ddenorm.storage import metadata, to_json_value
from ddenorm.systems import symbolic_model


def _close(value: complex, expected: complex, tol: float = 1e-3) -> bool:
    return abs(value.real - expected.real) <= tol and abs(value.imag - expected.imag) <= tol


def _orientation(value: float, published: float) -> float:
    """+1 when the computed coefficient has the published sign, -1 otherwise"""
    return float(np.sign(value) * np.sign(published))


# ODE oracles

def test_planar_genh_coefficients(planar_genh):
    model, pt = planar_genh
    data = genh_normal_form(model, pt)
    assert data.omega0 == pytest.approx(1.0)
    assert data.c1.real == pytest.approx(0.0, abs=1e-8)
    assert data.c1.imag == pytest.approx(1.4, abs=1e-8)
    assert data.c2.real == pytest.approx(-1.2, abs=1e-8)
    assert data.c2.imag == pytest.approx(0.0, abs=1e-8)
    assert data.l2 == pytest.approx(-1.2, abs=1e-8)


def test_planar_genh_parameter_map(planar_genh):
    model, pt = planar_genh
    data = genh_normal_form(model, pt)
    # a1 moves the eigenvalue, a2 moves Re c1
    assert data.gamma["gamma110"].real == pytest.approx(1.0, abs=1e-8)
    assert data.gamma["gamma101"].real == pytest.approx(0.0, abs=1e-8)
    assert data.gamma["gamma201"].real == pytest.approx(2.0, abs=1e-6)
    assert data.alpha_of([0.0, 0.0]) == pytest.approx([0.0, 0.0])


def test_decoupled_hopf_pairs(decoupled_hopf):
    model, pt = decoupled_hopf
    data = hoho_normal_form(model, pt)
    assert data.omega1 == pytest.approx(np.sqrt(5.0))
    assert data.omega2 == pytest.approx(1.0)
    assert abs(data.g1011) < 1e-10
    assert abs(data.g1110) < 1e-10
    # the faster oscillator comes first
    assert _close(data.g2100, 2 * (-2.0 - 0.25j), 1e-8)
    assert _close(data.g0021, 2 * (-1.0 + 0.5j), 1e-8)


def test_first_lyapunov_matches_genh_c1(fhn, fhn_hopf, fhn_hopf_nmfm):
    eq = fhn_hopf.equilibrium
    l1 = first_lyapunov(make_bundle(fhn, eq.x, eq.alpha, 3), fhn_hopf.eigenpair)
    assert l1 == pytest.approx(fhn_hopf_nmfm.l1, rel=1e-10)


# Generalized Hopf

def test_fhn_hopf_lyapunov_coefficients(fhn_hopf_nmfm):
    assert fhn_hopf_nmfm.l1 == pytest.approx(0.3980, abs=1e-2)
    assert fhn_hopf_nmfm.l2 == pytest.approx(-18.1302, rel=1e-2)


def test_fhn_genh_second_lyapunov(fhn_genh_nmfm):
    assert abs(fhn_genh_nmfm.l1) < 1e-2
    assert fhn_genh_nmfm.l2 == pytest.approx(-15.6733, rel=1e-2)
    assert max(fhn_genh_nmfm.residuals.values()) < RESIDUAL_TOL


def test_genh_document_validates(fhn_genh_nmfm):
    doc = to_json_value({**fhn_genh_nmfm.to_dict(), "metadata": metadata(command="analyze")})
    validate("nmfm_genh", doc)
    assert doc["db1_dbeta2"] == doc["omega01"]


# Fold-Hopf

def test_rh_set1_coefficients(rh_set1):
    _, data = rh_set1
    assert data.s_product == pytest.approx(1.8487e-05, rel=2e-2)
    assert data.theta == pytest.approx(-139.0315, rel=1e-2)
    assert data.e == pytest.approx(15.6941, rel=1e-2)
    assert abs(data.omega1) == pytest.approx(7.4540, rel=1e-2)
    assert data.omega2 == pytest.approx(2.1259, rel=1e-2)
    sign = _orientation(data.g200, -0.0024)
    assert _close(sign * data.g110, 0.3296 + 0.7006j)
    assert sign * data.g011 == pytest.approx(-0.0078, abs=1e-3)


def test_rh_set2_coefficients(rh_set2):
    _, data = rh_set2
    assert data.s == 1
    assert data.s_product == pytest.approx(1.7700, rel=1e-2)
    assert data.theta == pytest.approx(-0.1569, rel=1e-2)
    assert data.e == pytest.approx(-0.0378, rel=2e-2)


def test_zero_vector_flip(rh, rh_set1):
    pt, data = rh_set1
    zero, hopf = pt.eigenpairs
    flipped = zeho_normal_form(rh, replace(pt, eigenpairs=(zero.flipped(), hopf)))
    for name in ("g200", "g011"):
        assert getattr(flipped, name) == pytest.approx(-getattr(data, name), rel=1e-8)
    assert _close(flipped.g110, -data.g110, 1e-10)
    assert flipped.g111 == pytest.approx(data.g111, rel=1e-8, abs=1e-12)
    assert flipped.g300 == pytest.approx(data.g300, rel=1e-8, abs=1e-12)
    assert flipped.omega1 == pytest.approx(-data.omega1, rel=1e-8)
    assert flipped.omega2 == pytest.approx(data.omega2, rel=1e-8)
    assert flipped.theta == pytest.approx(data.theta, rel=1e-8)
    assert flipped.e == pytest.approx(data.e, rel=1e-8)


def test_hopf_vector_phase(rh, rh_set2):
    pt, data = rh_set2
    zero, hopf = pt.eigenpairs
    rotated = zeho_normal_form(rh, replace(pt, eigenpairs=(zero, hopf.rephased(0.9))))
    for name in ("g110", "g210", "g021"):
        assert _close(getattr(rotated, name), getattr(data, name), 1e-8)
    assert rotated.e == pytest.approx(data.e, rel=1e-8)


def test_vdp_transcritical_coefficients(vdp_thopf):
    _, data = vdp_thopf
    assert data.transcritical
    sign = _orientation(data.g200, 0.2121)
    assert sign * data.g200 == pytest.approx(0.2121, abs=1e-3)
    assert sign * data.g011 == pytest.approx(0.4241, abs=1e-3)
    assert _close(sign * data.g110, -0.1337 + 0.2672j)
    assert data.g300 == pytest.approx(0.4935, abs=1e-3)
    assert data.g111 == pytest.approx(1.0243, abs=1e-3)
    assert _close(data.g210, -0.8178 - 0.4283j)
    assert _close(data.g021, -0.3302 - 0.1646j)
    assert abs(data.omega1) == pytest.approx(0.4644, abs=1e-3)
    assert data.omega2 == pytest.approx(1.2768, abs=1e-3)
    assert data.theta == pytest.approx(-0.1337 / 0.2121, rel=1e-2)


def test_zeho_document_validates(vdp_thopf):
    _, data = vdp_thopf
    doc = to_json_value({**data.to_dict(), "metadata": metadata(command="analyze")})
    validate("nmfm_zeho", doc)
    assert doc["kind"] == "thopf"


# Hopf-Hopf

def test_acs_hoho_coefficients(acs_hoho):
    _, data = acs_hoho
    assert _close(data.g2100, -0.0915 + 0.1214j)
    assert _close(data.g1011, -0.3084 + 0.4096j)
    assert _close(data.g1110, 0.2151 + 0.3876j)
    assert _close(data.g0021, 0.1813 + 0.3268j)
    assert data.theta == pytest.approx(-1.7009, abs=1e-3)
    assert data.delta == pytest.approx(-2.3517, abs=1e-3)


def test_hoho_document_validates(acs_hoho):
    _, data = acs_hoho
    doc = to_json_value({**data.to_dict(), "metadata": metadata(command="analyze")})
    validate("nmfm_hoho", doc)
    assert set(doc) >= {"b11", "b12", "b21", "b22"}


# Dispatch

def test_kind_checked(rh, rh_set1, acs, acs_hoho):
    with pytest.raises(InvalidInput):
        genh_normal_form(rh, rh_set1[0])
    with pytest.raises(InvalidInput):
        zeho_normal_form(acs, acs_hoho[0])
    assert normal_form(acs, acs_hoho[0]).kind == "hoho"


def test_homological_residual_enforced(monkeypatch, decoupled_hopf):
    model, pt = decoupled_hopf
    monkeypatch.setattr("ddenorm.nmfm.resolvent_residuals", lambda *args, **kwargs: (1.0, 1.0))
    with pytest.raises(InconsistentSystem) as info:
        hoho_normal_form(model, pt)
    assert info.value.details["residual"] == 1.0
    assert info.value.details["H"]


def _oscillator_pair(quartic: float):
    omegas = (1.0, np.sqrt(5.0))

    def build(X, P):
        (x1, y1, x2, y2) = (X[k][0] for k in range(4))
        r1, r2 = x1 ** 2 + y1 ** 2, x2 ** 2 + y2 ** 2
        return [
            P[0] * x1 - omegas[0] * y1 + (-x1 - 0.5 * y1) * r1 + 0.4 * x1 * x2 + quartic * x1 ** 2 * y2 ** 2,
            omegas[0] * x1 + P[0] * y1 + (0.5 * x1 - y1) * r1 + quartic * y1 ** 4,
            P[1] * x2 - omegas[1] * y2 + (-2 * x2 + 0.25 * y2) * r2 + 0.3 * y1 * y2,
            omegas[1] * x2 + P[1] * y2 + (-0.25 * x2 - 2 * y2) * r2 + quartic * x1 * x2 ** 3,
        ]

    return symbolic_model(f"oscillator_pair_{quartic}", 4, ("mu1", "mu2"), 0, lambda a: [0.0], build)


def test_quartic_terms_leave_cubic_coefficients():
    datas = []
    for quartic in (0.0, 1.7):
        model = _oscillator_pair(quartic)
        eq = correct_equilibrium(model, [0.0, 0.0], np.zeros(4))
        datas.append(hoho_normal_form(model, classify_codim2(model, eq, (0, 1), expect="hoho")))
    base, perturbed = datas
    for name in ("g2100", "g1011", "g1110", "g0021"):
        assert abs(getattr(perturbed, name) - getattr(base, name)) <= 1e-12
    assert np.abs(perturbed.K - base.K).max() <= 1e-12
