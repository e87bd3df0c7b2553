"""
Tests for equilibrium, Hopf, fold and codimension-two point correction
"""

import numpy as np
import pytest

from ddenorm.errors import AmbiguousPattern, InvalidInput, NoConvergence, ResonanceDetected
from ddenorm.model import eval_rhs, linearize
from ddenorm.points import (
    DefiningSystem,
    check_nonresonance,
    check_unfolding,
    classify_codim2,
    correct_equilibrium,
    correct_fold,
    correct_codim2,
    fold_from_equilibrium,
    hopf_from_equilibrium,
    hopf_tests,
    newton,
    with_l1,
)
from ddenorm.spectrum import det_residual
from ddenorm.systems import symbolic_model


# Newton

def test_newton_solves_quadratic():
    y, iterations = newton(lambda v: np.array([v[0] ** 2 - 2.0]), np.array([1.0]))
    assert y[0] == pytest.approx(np.sqrt(2.0), abs=1e-10)
    assert iterations <= 8


def test_newton_reports_failure():
    with pytest.raises(NoConvergence) as info:
        newton(lambda v: np.array([v[0] ** 2 + 1.0]), np.array([0.3]), maxiter=5)
    assert info.value.details["maxiter"] == 5


# Equilibria

def test_correct_equilibrium_rh(rh):
    ex = rh.examples["set1"]
    guess = np.asarray(ex["state"]) + 0.01
    eq = correct_equilibrium(rh, ex["parameters"], guess)
    assert eq.x == pytest.approx(ex["state"], abs=1e-8)
    assert np.linalg.norm(eval_rhs(rh, rh.samples(eq.x, eq.alpha), eq.alpha)) < 1e-10


# Hopf points

def test_fhn_hopf_corrected(fhn_hopf):
    assert fhn_hopf.equilibrium.alpha[0] == pytest.approx(1.9)
    assert fhn_hopf.equilibrium.alpha[1] == pytest.approx(-0.9710, abs=1e-3)
    assert fhn_hopf.omega == pytest.approx(0.0720, abs=1e-4)
    assert fhn_hopf.free_param == 1
    assert fhn_hopf.equilibrium.residual < 1e-8


def test_fhn_hopf_l1(fhn, fhn_hopf):
    hp = with_l1(fhn, fhn_hopf)
    assert hp.l1 == pytest.approx(0.3980, abs=1e-2)


def test_hopf_tests_on_branch_point(fhn, fhn_hopf):
    tests = hopf_tests(fhn, fhn_hopf)
    assert set(tests) == {"L1", "nearest_real_eig", "second_pair_re", "unstable_pairs"}
    assert tests["second_pair_re"] == pytest.approx(-0.0818, abs=1e-3)
    assert tests["unstable_pairs"] == 0


def _three_oscillators():
    omegas = (1.0, np.sqrt(3.0), np.sqrt(7.0))

    def build(X, P):
        exprs = []
        for k, (mu, omega) in enumerate(zip(P, omegas)):
            x, y = X[2 * k][0], X[2 * k + 1][0]
            r2 = x ** 2 + y ** 2
            exprs.append(mu * x - omega * y - x * r2)
            exprs.append(omega * x + mu * y - y * r2)
        return exprs

    return symbolic_model("three_oscillators", 6, ("mu1", "mu2", "mu3"), 0, lambda a: [0.0], build)


def test_second_crossing_counted_with_unstable_pair():
    model = _three_oscillators()
    counts = []
    for mu3 in (-0.01, 0.01):
        eq = correct_equilibrium(model, [0.0, 0.3, mu3], np.zeros(6))
        tests = hopf_tests(model, hopf_from_equilibrium(model, eq, 1.0))
        counts.append(tests["unstable_pairs"])
        # the pair at mu2 = 0.3 stays unstable on both sides
        assert tests["second_pair_re"] == pytest.approx(mu3, abs=1e-8)
    assert counts == [1.0, 2.0]


# Fold points

def test_fold_on_rh_set2(rh):
    ex = rh.examples["set2"]
    eq = correct_equilibrium(rh, ex["parameters"], ex["state"])
    guess = fold_from_equilibrium(rh, eq)
    fold = correct_fold(rh, guess, 0)
    lin = linearize(rh, fold.equilibrium.x, fold.equilibrium.alpha)
    assert det_residual(lin, 0.0) < 1e-8
    assert fold.equilibrium.alpha[0] == pytest.approx(ex["parameters"][0], abs=1e-6)


# Codimension two

def test_check_unfolding(fhn, acs):
    assert check_unfolding(fhn, [0, 1]) == (0, 1)
    with pytest.raises(InvalidInput):
        check_unfolding(fhn, [0, 0])
    with pytest.raises(InvalidInput):
        check_unfolding(fhn, [0, 2])
    assert check_unfolding(acs, [0, 1]) == (0, 1)


def test_nonresonance():
    check_nonresonance(7.6449, 4.5275)
    with pytest.raises(ResonanceDetected) as info:
        check_nonresonance(2.0, 1.0)
    assert (info.value.details["k"], info.value.details["l"]) == (1, 2)


def test_rh_zeho_points(rh_set1, rh_set2):
    for pt, _ in (rh_set1, rh_set2):
        assert pt.kind == "zeho"
        assert pt.equilibrium.residual < 1e-8
        zero, hopf = pt.eigenpairs
        assert zero.is_real and not hopf.is_real
    assert rh_set1[0].omegas[0] == pytest.approx(rh_set1[0].eigenpairs[1].omega)


def test_acs_hoho_point(acs_hoho):
    pt, _ = acs_hoho
    assert pt.kind == "hoho"
    assert pt.omegas == pytest.approx((7.6449, 4.5275), abs=1e-3)
    assert pt.equilibrium.alpha == pytest.approx([-0.016225, 5.89802], abs=1e-3)


def test_vdp_thopf_keeps_trivial_equilibrium(vdp_thopf):
    pt, _ = vdp_thopf
    assert pt.kind == "thopf"
    assert pt.equilibrium.x == pytest.approx([0.0, 0.0], abs=1e-12)
    assert pt.omegas[0] == pytest.approx(2.4539, abs=1e-3)


def test_classify_matches_patterns(rh, rh_set2, vdp, vdp_thopf):
    pt, _ = rh_set2
    assert classify_codim2(rh, pt, (0, 1)).kind == "zeho"
    assert classify_codim2(vdp, vdp_thopf[0], (0, 1)).kind == "thopf"


def test_classify_reports_mismatch(fhn, fhn_hopf):
    with pytest.raises(AmbiguousPattern) as info:
        classify_codim2(fhn, fhn_hopf, (0, 1), l1_tol=1e-6)
    assert info.value.details["L1"] == pytest.approx(0.3980, abs=1e-2)
    with pytest.raises(AmbiguousPattern):
        classify_codim2(fhn, fhn_hopf, (0, 1), expect="hoho")


def test_hoho_corrector_needs_two_pairs(planar_genh, decoupled_hopf):
    model, pt = planar_genh
    with pytest.raises(AmbiguousPattern):
        correct_codim2(model, pt.equilibrium, "hoho", (0, 1))
    model, pt = decoupled_hopf
    with pytest.raises(AmbiguousPattern):
        correct_codim2(model, pt.equilibrium, "hoho", (0, 1), omegas=[1.0, 1.01])


def test_pinned_system_replaces_equilibrium_block(vdp, vdp_thopf):
    pt, _ = vdp_thopf
    zero, hopf = pt.eigenpairs
    system = DefiningSystem(vdp, pt.equilibrium.alpha, (0, 1), ("zero", "imag"), pin=np.zeros(2))
    y = system.pack([0.1, -0.2], pt.equilibrium.alpha, [(0j, zero.q), (1j * hopf.omega, hopf.q)])
    residual = system.residual(y)
    assert residual.size == system.size == y.size
    assert residual[:2] == pytest.approx([0.1, -0.2])
