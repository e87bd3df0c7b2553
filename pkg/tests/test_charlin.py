"""
Tests for the characteristic matrix, ExpPoly algebra and the linear solvers
"""

import numpy as np
import pytest

from ddenorm.charlin import (
    CharLinearization,
    ExpPoly,
    binv,
    pairing,
    resolvent_residuals,
    resolvent_solve,
    solve_bordered,
)
from ddenorm.errors import InconsistentSystem, InvalidInput, NearSingularResolvent, SingularBorder
from ddenorm.spectrum import refine_eigenpair, rightmost

CASES = 100


def _random_lin(rng, n=3, m=2):
    taus = np.concatenate([[0.0], np.sort(rng.uniform(0.3, 2.0, m))])
    mats = 0.5 * rng.standard_normal((m + 1, n, n))
    return CharLinearization(taus, mats)


def _scalar_lin(k=np.pi / 2):
    return CharLinearization(np.array([0.0, 1.0]), np.array([[[0.0]], [[-k]]]))


# CharLinearization

def test_rejects_bad_delays():
    with pytest.raises(InvalidInput):
        CharLinearization(np.array([0.0, 1.0, 1.0]), np.zeros((3, 2, 2)))
    with pytest.raises(InvalidInput):
        CharLinearization(np.array([0.5, 1.0]), np.zeros((2, 2, 2)))
    with pytest.raises(InvalidInput):
        CharLinearization(np.array([0.0, 1.0]), np.zeros((3, 2, 2)))


def test_scalar_delta_vanishes_on_root():
    lin = _scalar_lin()
    assert abs(lin.delta(1j * np.pi / 2)[0, 0]) < 1e-14
    assert lin.delta(0.0)[0, 0] == pytest.approx(np.pi / 2)


@pytest.mark.parametrize("k", [1, 2])
def test_delta_derivatives_match_fd(k, rng):
    lin = _random_lin(rng)
    h = 1e-5
    for _ in range(10):
        z = complex(rng.standard_normal(), 3 * rng.standard_normal())
        if k == 1:
            fd = (lin.delta(z + h) - lin.delta(z - h)) / (2 * h)
        else:
            fd = (lin.delta(z + h) - 2 * lin.delta(z) + lin.delta(z - h)) / h ** 2
        exact = lin.delta_deriv(z, k)
        tol = 1e-8 if k == 1 else 1e-4
        assert np.abs(exact - fd).max() <= tol * max(1.0, np.abs(exact).max())


def test_delta_derivative_order_checked():
    with pytest.raises(InvalidInput):
        _scalar_lin().delta_deriv(0.0, 3)


# ExpPoly

def test_exppoly_sum_matches_direct_evaluation(rng):
    z1, z2 = complex(0.3, 2.0), complex(-0.1, -1.0)
    a1, b1, a2 = (rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(3))
    h = ExpPoly.term(z1, a1, b1, span=2.0) + ExpPoly.term(z2, a2, span=2.0)
    thetas = -rng.uniform(0.0, 2.0, CASES)
    direct = np.exp(z1 * thetas)[:, None] * (a1 + thetas[:, None] * b1) + np.exp(z2 * thetas)[:, None] * a2
    assert np.abs(h(thetas) - direct).max() <= 1e-14 * max(1.0, np.abs(direct).max())


def test_exppoly_merges_equal_exponents():
    h = ExpPoly.term(1j, [1.0]) + ExpPoly.term(1j, [2.0], [1.0])
    assert h.exponents.size == 1
    assert h.coeffs[0] == pytest.approx([3.0])
    assert h.slopes[0] == pytest.approx([1.0])


def test_exppoly_derivative_and_head():
    h = ExpPoly.term(2.0, [1.0], [0.5], span=1.0)
    assert h.head == pytest.approx([1.0])
    assert h(0.0) == pytest.approx([1.0])
    # d/dt e^{2t}(1 + t/2) = e^{2t}(2 + t + 1/2)
    assert h.derivative(-0.5)[0] == pytest.approx(np.exp(-1.0) * 2.0)


def test_exppoly_domain_checked():
    h = ExpPoly.term(1.0, [1.0], span=1.0)
    with pytest.raises(InvalidInput):
        h(0.5)
    with pytest.raises(InvalidInput):
        h(-1.5)


def test_exppoly_real_part():
    h = ExpPoly.term(1j, [1.0 + 1.0j])
    theta = -0.7
    assert h.real()(theta)[0] == pytest.approx((np.exp(1j * theta) * (1 + 1j)).real)


def test_exppoly_scalar_algebra():
    h = ExpPoly.constant([1.0, 2.0])
    g = 2.0 * h - h
    assert g(0.0) == pytest.approx([1.0, 2.0])
    assert (np.float64(3.0) * h)(0.0) == pytest.approx([3.0, 6.0])


# Bordered solves

def test_solve_bordered_random_singular(rng):
    for _ in range(CASES):
        n = int(rng.integers(2, 6))
        U = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        s = np.concatenate([rng.uniform(0.5, 2.0, n - 1), [0.0]])
        M = U @ np.diag(s) @ V
        q = np.linalg.svd(M)[2][-1].conj()
        p = np.linalg.svd(M.T)[2][-1].conj()
        y = M @ (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        x = solve_bordered(M, q, p, y)
        # oracle: least-squares solution shifted along q so that p.x = 0
        x0 = np.linalg.lstsq(M, y, rcond=None)[0]
        oracle = x0 - (p @ x0) / (p @ q) * q
        assert np.linalg.norm(M @ x - y) <= 1e-9 * max(1.0, np.linalg.norm(y))
        assert abs(p @ x) <= 1e-10 * max(1.0, np.linalg.norm(x))
        assert np.linalg.norm(x - oracle) <= 1e-8 * max(1.0, np.linalg.norm(oracle))


def test_solve_bordered_inconsistent_rhs():
    M = np.diag([1.0, 0.0]).astype(complex)
    q = np.array([0.0, 1.0])
    p = np.array([0.0, 1.0])
    with pytest.raises(InconsistentSystem):
        solve_bordered(M, q, p, np.array([1.0, 1.0]))


def test_solve_bordered_singular_border():
    M = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(SingularBorder):
        solve_bordered(M, np.array([1.0, 0.0]), np.array([1.0, 0.0]), np.array([1.0, 0.0]))


# Resolvent

def test_resolvent_residuals_random(rng):
    for _ in range(CASES):
        lin = _random_lin(rng, n=int(rng.integers(1, 4)), m=int(rng.integers(1, 3)))
        z = complex(rng.uniform(0.5, 2.0), rng.uniform(-5.0, 5.0))
        w0 = rng.standard_normal(lin.n) + 1j * rng.standard_normal(lin.n)
        zw = complex(rng.standard_normal(), rng.standard_normal())
        w = ExpPoly.term(zw, rng.standard_normal(lin.n), rng.standard_normal(lin.n))
        try:
            v = resolvent_solve(lin, z, w0, w)
        except NearSingularResolvent:
            continue
        interior, boundary = resolvent_residuals(lin, z, v, w0, w)
        assert interior < 1e-8
        assert boundary < 1e-8


def test_resolvent_without_forcing_is_exponential():
    lin = _scalar_lin(1.0)
    v = resolvent_solve(lin, 2.0, np.array([1.0]))
    assert v.exponents == pytest.approx([2.0])
    assert v.head[0] * lin.delta(2.0)[0, 0] == pytest.approx(1.0)


def test_resolvent_guard_near_root():
    lin = _scalar_lin()
    with pytest.raises(NearSingularResolvent) as info:
        resolvent_solve(lin, 1j * np.pi / 2 + 1e-12, np.array([1.0]))
    assert "abs_det" in info.value.details


# Solves at an eigenvalue

def test_binv_enforces_solvability():
    lin = _scalar_lin()
    pair = refine_eigenpair(lin, 1j * np.pi / 2)
    with pytest.raises(InconsistentSystem):
        binv(lin, pair.lam, pair.q, pair.p, np.array([1.0]), 0.0)
    # eta = -kappa Delta'(lam) q satisfies the condition exactly
    kappa = 0.3 - 0.2j
    eta = -kappa * (lin.delta_deriv(pair.lam, 1) @ pair.q)
    v = binv(lin, pair.lam, pair.q, pair.p, eta, kappa)
    assert abs(pairing(lin, pair.lam, pair.p, v)) < 1e-10


def test_binv_solution_satisfies_equation(rng):
    for _ in range(20):
        lin = _random_lin(rng, n=2, m=1)
        pair = rightmost(lin, 1)[0]
        kappa = complex(rng.standard_normal(), rng.standard_normal())
        eta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        # project eta onto the consistent set
        d1q = lin.delta_deriv(pair.lam, 1) @ pair.q
        eta = eta - (pair.p @ (eta + kappa * d1q)) * pair.q / (pair.p @ pair.q)
        v = binv(lin, pair.lam, pair.q, pair.p, eta, kappa)
        phi = pair.phi(lin.tau_max)
        interior, boundary = resolvent_residuals(lin, pair.lam, v, eta + kappa * pair.q, kappa * phi)
        assert interior < 1e-8
        assert boundary < 1e-8
        assert abs(pairing(lin, pair.lam, pair.p, v)) < 1e-8 * max(1.0, np.abs(v.coeffs).max())


def test_pairing_of_eigenfunction_is_one():
    lin = _scalar_lin()
    pair = refine_eigenpair(lin, 1j * np.pi / 2)
    assert pairing(lin, pair.lam, pair.p, pair.phi(lin.tau_max)) == pytest.approx(1.0, abs=1e-12)
