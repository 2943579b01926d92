import numpy as np
import pytest

from sympeps import symplectic as sy


def test_cubic_root_bisection_matches_closed_form():
    root, closed = sy.cubic_z0()
    assert abs(root - closed) <= 1e-12
    assert abs(root**3 + 6.75 * root - 6.75) <= 1e-12
    assert abs(closed**3 + 6.75 * closed - 6.75) <= 1e-12
    assert root == pytest.approx(0.894, abs=5e-4)


def test_threshold_value():
    threshold = sy.squeeze_eps_threshold()
    assert threshold == pytest.approx(0.2006, abs=1e-3)
    z0 = sy.cubic_z0()[1]
    assert threshold == pytest.approx(1.0 - z0 * z0, abs=1e-15)


def test_c_rho_at_one_is_exactly_one():
    assert sy.c_rho(1.0) == 1.0


def test_c_rho_root_properties():
    for rho_val in np.linspace(0.90, 0.999, 25):
        c = sy.c_rho(float(rho_val))
        assert 2.0 / 3.0 < c <= 1.0
        s = (1.0 - rho_val) / rho_val**3
        assert abs(c**3 - c**2 + s) <= 1e-12


def test_c_rho_monotone_and_limit():
    values = [sy.c_rho(float(r)) for r in np.linspace(0.90, 0.9999, 50)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert sy.c_rho(0.9999) >= 0.999  # c_rho -> 1 as rho -> 1


def test_c_rho_rejects_inadmissible_rho():
    with pytest.raises(ValueError, match="admissible"):
        sy.c_rho(0.85)  # below the cubic root z0 ~ 0.8941
    with pytest.raises(ValueError, match="rho"):
        sy.c_rho(1.5)


def test_rigidity_bound_zero_is_exact():
    for n in (1, 2, 5):
        assert sy.rigidity_bound(0.0, n) == 0.0


def test_rigidity_bound_monotone_on_grid():
    threshold = sy.squeeze_eps_threshold()
    grid = np.linspace(0.0, threshold * 0.999, 100)
    values = [sy.rigidity_bound(float(e), 3) for e in grid]
    assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))


def test_rigidity_bound_small_for_small_eps():
    for eps in (0.001, 0.005, 0.01):
        for n in range(1, 6):
            assert sy.rigidity_bound(eps, n) < 1.0


def test_rigidity_bound_domain():
    threshold = sy.squeeze_eps_threshold()
    with pytest.raises(ValueError, match="eps"):
        sy.rigidity_bound(threshold + 1e-6, 2)
    with pytest.raises(ValueError, match="eps"):
        sy.rigidity_bound(-0.01, 2)
