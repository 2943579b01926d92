import math
from fractions import Fraction

import numpy as np
import pytest

from sympeps import moser as mo
from sympeps import symplectic as sy


def test_flow_config_validation():
    with pytest.raises(ValueError, match="step size"):
        mo.FlowConfig(step_size=0.05)
    with pytest.raises(ValueError, match="step size"):
        mo.FlowConfig(step_size=0.0)
    with pytest.raises(ValueError, match="method"):
        mo.FlowConfig(method="euler")
    assert mo.FlowConfig(step_size=2e-3).n_steps == 500


def test_field_vanishes_for_symplectic_input():
    rng = np.random.default_rng(1)
    psi = sy.random_symplectic(2, rng)
    for t in (0.0, 0.3, 1.0):
        assert np.max(np.abs(mo.moser_field_matrix(psi, t))) <= 1e-12


def test_field_closed_form_for_plane_scaling():
    c = 1.2
    phi = sy.plane_scaling([c, c])
    for t in (0.0, 0.5, 1.0):
        C = mo.moser_field_matrix(phi, t)
        expected = -0.5 * (c**2 - 1.0) / (1.0 + t * (c**2 - 1.0)) * np.eye(4)
        np.testing.assert_allclose(C, expected, atol=1e-12)


def test_field_at_time_zero():
    phi = sy.asymmetric_defect_map(0.2, 3.0)
    J = sy.standard_J(2)
    M = phi.T @ J @ phi - J
    np.testing.assert_allclose(
        mo.moser_field_matrix(phi, 0.0), -0.5 * np.linalg.solve(J, M), atol=1e-13
    )


def test_symplectify_identity():
    rep = mo.symplectify(np.eye(4), 0.0)
    np.testing.assert_allclose(rep.psi, np.eye(4), atol=1e-13)
    assert rep.residual_defect <= 1e-13
    assert rep.passed


def test_symplectify_plane_scaling_analytic_oracle():
    # the flow inverts each plane factor: psi = diag(1/c_j) up to integrator error
    for factors in ([0.8, 1.25], [1.1, 0.9], [0.85, 1.2, 1.05]):
        phi = sy.plane_scaling(factors)
        eps = sy.defect(phi)
        rep = mo.symplectify(phi, eps + 1e-12)
        oracle = sy.plane_scaling([1.0 / c for c in factors])
        assert np.max(np.abs(rep.psi - oracle)) <= 1e-6
        assert rep.residual_defect <= 1e-6
        assert rep.passed


def test_symplectify_random_eps_maps():
    for seed in range(10):
        phi = sy.random_eps_symplectic(2, 0.05, seed=seed)
        rep = mo.symplectify(phi, 0.05)
        assert rep.residual_defect <= 1e-6
        assert rep.displacement_margin >= -1e-6
        assert rep.sandwich_margin_lower >= -1e-6
        assert rep.sandwich_margin_upper >= -1e-6
        assert rep.passed


def test_symplectify_composition_is_symplectic():
    phi = sy.random_eps_symplectic(3, 0.15, seed=5)
    rep = mo.symplectify(phi, 0.15)
    assert sy.defect(phi @ rep.psi) == pytest.approx(rep.residual_defect, abs=1e-15)
    assert rep.residual_defect <= 1e-6


def test_symplectify_preconditions():
    phi = sy.asymmetric_defect_map(0.3, 2.0)
    with pytest.raises(ValueError, match="exceeds eps"):
        mo.symplectify(phi, 0.1)
    with pytest.raises(ValueError, match="sqrt"):
        mo.symplectify(np.eye(4), 0.8)


def test_step_halving_is_fourth_order():
    phi = sy.random_eps_symplectic(2, 0.68, seed=4)
    psis = [
        mo.symplectify(phi, 0.68, mo.FlowConfig(step_size=s)).psi
        for s in (0.01, 0.005, 0.0025)
    ]
    ratio = np.linalg.norm(psis[0] - psis[1], "fro") / np.linalg.norm(
        psis[1] - psis[2], "fro"
    )
    assert abs(ratio - 16.0) <= 2.0


def test_report_serializes():
    rep = mo.symplectify(np.eye(4), 0.0)
    data = rep.to_dict()
    assert data["passed"] is True
    assert data["steps"] == 1000
    assert np.asarray(data["psi"]).shape == (4, 4)


def test_polymap_pullback_of_linear_map_matches_matrix_route():
    phi = sy.asymmetric_defect_map(0.25, 2.0)
    pm = mo.PolyMap.from_matrix(phi)
    beta = pm.pullback_omega0()
    J = sy.standard_J(2)
    M = phi.T @ J @ phi
    for (i, j), poly in beta.terms.items():
        assert set(poly) == {(0, 0, 0, 0)}  # linear map: constant coefficients
        assert float(poly[(0, 0, 0, 0)]) == pytest.approx(M[j - 1, i - 1], abs=1e-15)


def test_pointwise_identity_map_constant_trajectories():
    pm = mo.PolyMap.identity(4)
    pts = [np.array([0.3, -0.2, 0.1, 0.4]), np.zeros(4)]
    rep = mo.symplectify_polynomial_pointwise(pm, pts, 0.0, mo.FlowConfig(step_size=1e-2))
    for p, fin in zip(rep.points, rep.finals):
        np.testing.assert_allclose(fin, p, atol=1e-14)
    assert rep.passed


def test_pointwise_matches_matrix_flow_for_linear_maps():
    phi = sy.random_eps_symplectic(2, 0.1, seed=9)
    eps = 0.1
    cfg = mo.FlowConfig(step_size=1e-3)
    matrix_rep = mo.symplectify(phi, eps, cfg)
    pm = mo.PolyMap.from_matrix(phi)
    pts = [np.array([0.5, 0.1, -0.3, 0.2]), np.array([0.0, 0.7, 0.1, -0.1])]
    point_rep = mo.symplectify_polynomial_pointwise(pm, pts, eps, cfg)
    for p, fin in zip(pts, point_rep.finals):
        np.testing.assert_allclose(fin, matrix_rep.psi @ p, atol=1e-8)
    assert point_rep.passed


def test_pointwise_plane_scaling_rescales_by_inverse_factors():
    factors = [Fraction(4, 5), Fraction(5, 4)]
    pm = mo.PolyMap.plane_scaling(factors)
    linear = sy.plane_scaling([float(f) for f in factors])
    eps = sy.defect(linear) + 1e-12
    pts = [np.array([0.3, 0.1, -0.2, 0.4]), np.array([0.5, 0.0, 0.0, 0.0])]
    rep = mo.symplectify_polynomial_pointwise(pm, pts, eps, mo.FlowConfig(step_size=1e-3))
    oracle = sy.plane_scaling([float(1 / f) for f in factors])
    for p, fin in zip(pts, rep.finals):
        np.testing.assert_allclose(fin, oracle @ p, atol=1e-6)
    assert rep.passed


def test_pointwise_rejects_defect_above_budget():
    pm = mo.PolyMap.plane_scaling([Fraction(2), Fraction(1)])
    with pytest.raises(ValueError, match="exceeds eps"):
        mo.symplectify_polynomial_pointwise(pm, [np.zeros(4)], 0.01)


def test_correction_realizes_width_inclusion():
    # the geometry behind the width certificates: the correction psi maps the
    # shrunken ellipsoid E(s_A A) into E(A), so the symplectic map phi @ psi
    # carries E(s_A A) into phi E(A)
    rng = np.random.default_rng(33)
    eps = 0.1
    eps_prime = math.sqrt(2.0) * eps
    phi = sy.random_eps_symplectic(2, eps, seed=11)
    psi = mo.symplectify(phi, eps).psi
    for _ in range(5):
        A = np.linalg.qr(rng.normal(size=(4, 4)))[0] @ sy.plane_scaling(
            rng.uniform(0.6, 1.6, size=2)
        )
        params = sy.squeezing_params(A, eps_prime)
        A_inv = np.linalg.inv(A)
        for _ in range(50):
            w = rng.normal(size=4)
            x = params.s_A * (A @ (w / np.linalg.norm(w)))  # boundary of E(s_A A)
            assert np.linalg.norm(A_inv @ (psi @ x)) <= 1.0 + 1e-6
