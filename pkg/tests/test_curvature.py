import math

import numpy as np
import pytest

from superint.curvature import (
    conformal_metric,
    conformal_scalar_curvature,
    curvature_check,
    perlick_one_curvature,
    perlick_one_omega,
    perlick_one_slice_curvature,
    scalar_curvature_fd,
)
from superint.systems import SystemSpec

RADII = [0.3, 0.5, 0.7, 0.9, 1.1, 1.4, 1.8, 2.3, 2.9, 3.6]


def test_flat_space():
    rep = curvature_check(SystemSpec("PerlickI", 3), RADII)
    assert all(abs(row["R_3d_numeric"]) < 1e-7 for row in rep.rows)
    assert perlick_one_slice_curvature(1.0, 0.0) == 0.0


def test_slice_value():
    assert perlick_one_slice_curvature(2.0, 0.5) == pytest.approx(16.0)
    rep = curvature_check(SystemSpec("PerlickI", 3, beta="2", k=0.5), RADII)
    assert rep.passed(1e-6)
    assert all(row["R_2d_numeric"] == pytest.approx(16.0, rel=1e-6) for row in rep.rows)


def test_single_radius():
    rep = curvature_check(SystemSpec("PerlickI", 3, beta="1/2", k=0.1), [1.3])
    assert rep.rows[0]["err_3d"] < 1e-6


def test_round_sphere():
    # 4 / (1 + r^2)^2 delta is the unit 3-sphere, R = 6
    metric = conformal_metric(lambda r: 4.0 / (1.0 + r * r) ** 2)
    assert scalar_curvature_fd(metric, [0.3, -0.2, 0.5], 1e-2) == pytest.approx(6.0, abs=1e-8)
    assert scalar_curvature_fd(metric, [0.3, -0.2], 1e-2) == pytest.approx(2.0, abs=1e-8)


def test_richardson_improves_accuracy():
    metric = conformal_metric(lambda r: 4.0 / (1.0 + r * r) ** 2)
    plain = abs(scalar_curvature_fd(metric, [0.4, 0.1, 0.2], 5e-2, richardson=False) - 6.0)
    extrap = abs(scalar_curvature_fd(metric, [0.4, 0.1, 0.2], 5e-2) - 6.0)
    assert extrap < plain / 10


def test_conformal_formula_against_finite_differences():
    beta, k = 1.5, 0.2
    for r in (0.6, 1.7):
        w, w1, w2 = perlick_one_omega(np.array([r]), beta, k)
        eps = 1e-4
        wp = perlick_one_omega(np.array([r + eps]), beta, k)[0]
        wm = perlick_one_omega(np.array([r - eps]), beta, k)[0]
        assert w1[0] == pytest.approx((wp[0] - wm[0]) / (2 * eps), rel=1e-7)
        assert w2[0] == pytest.approx((wp[0] - 2 * w[0] + wm[0]) / eps**2, rel=1e-5)
        expected = conformal_scalar_curvature(r, w1[0], w2[0], 3) / math.exp(2 * w[0])
        assert perlick_one_curvature(r, beta, k) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("beta", ["1/2", "1", "2"])
@pytest.mark.parametrize("k", [0.0, 0.1, 0.5])
def test_closed_forms_match_numerics(beta, k):
    rep = curvature_check(SystemSpec("PerlickI", 3, beta=beta, k=k), RADII)
    assert len(rep.rows) == 10
    assert rep.max_error < 1e-6


def test_other_families_rejected():
    with pytest.raises(ValueError):
        curvature_check(SystemSpec("KeplerCurved", 3), [1.0])


def test_bad_radii_are_reported():
    rep = curvature_check(SystemSpec("PerlickI", 3), [-1.0, 1.0])
    assert len(rep.rows) == 1 and rep.notes
    assert "max_error" in rep.to_json()


def test_invalid_step():
    with pytest.raises(ValueError):
        scalar_curvature_fd(conformal_metric(lambda r: 1.0), [1.0, 0.0], 0.0)
