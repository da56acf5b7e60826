import math
from fractions import Fraction

import numpy as np
import pytest

from superint import phasespace as ps
from superint.phasespace import Observable, PhasePoint, poisson_bracket
from superint.systems import (
    SpecError,
    SystemSpec,
    angular_rescale,
    build,
    ccm,
    darboux_ccm_parts,
    levi_civita,
    levi_civita_map,
    parse_rational,
    polar_to_cartesian,
)
from superint.transforms import angular_rescale_identity, ccm_identity, levi_civita_identity


def polar(r, th, pr, pth):
    x, p = polar_to_cartesian(r, th, pr, pth)
    return PhasePoint(x, p)


# --- specs ----------------------------------------------------------------------------
def test_spec_json_round_trip():
    spec = SystemSpec("PerlickII", 3, lam=0.3, delta=0.1, gamma="3/2")
    again = SystemSpec.from_json(spec.to_json())
    assert again == spec
    assert spec.to_json()["gamma"] == "3/2"


@pytest.mark.parametrize("bad", ["2/4", "1/0", "x", 0.5, "-1/2"])
def test_rationals_must_be_canonical(bad):
    with pytest.raises(SpecError):
        parse_rational(bad)


def test_integer_rational_accepted():
    assert parse_rational(2) == Fraction(2)
    assert parse_rational("3") == Fraction(3)


@pytest.mark.parametrize("data", [
    {"family": "Nope"},
    {"family": "KeplerCurved", "dim": 1},
    {"family": "KeplerCurved", "mu": -1.0},
    {"family": "KeplerCurved", "colour": 1},
    {"family": "TTWCurved", "dim": 3},
    {"family": "TTWCurved", "b1": -0.1},
    {"dim": 2},
])
def test_invalid_specs(data):
    with pytest.raises(SpecError):
        SystemSpec.from_json(data)


# --- Hamiltonian values -------------------------------------------------------------
def test_flat_circular_kepler():
    H = build(SystemSpec("KeplerCurved", 2)).H
    assert H(polar(1.0, 0.0, 0.0, 1.0)) == pytest.approx(-0.5)


def test_curved_kepler_value():
    H = build(SystemSpec("KeplerCurved", 2, k=0.1)).H
    assert H(polar(1.0, 0.4, 0.0, 1.0)) == pytest.approx(-0.295)


def test_perlick_one_at_rest():
    H = build(SystemSpec("PerlickI", 2, beta="1/2")).H
    assert H(PhasePoint([1.0, 0.0], [0.0, 0.0])) == pytest.approx(-1.0)


def test_perlick_one_beta_one_is_kepler_without_shift():
    rng = np.random.default_rng(1)
    mu, delta = 1.3, 0.07
    perlick = build(SystemSpec("PerlickI", 3, k=0.2, mu=mu)).H
    kepler = build(SystemSpec("KeplerCurved", 3, k=0.2, mu=mu, delta=delta)).H
    for pt in ps.random_points(3, 20, rng):
        assert perlick(pt) == pytest.approx(kepler(pt) - 4 * mu * delta, rel=1e-14, abs=1e-14)


def test_ttw_without_barriers_is_perlick_one():
    rng = np.random.default_rng(2)
    ttw = build(SystemSpec("TTWCurved", beta="2/3", k=0.1)).H
    perlick = build(SystemSpec("PerlickI", beta="2/3", k=0.1)).H
    for pt in ps.random_points(2, 20, rng):
        assert ttw(pt) == perlick(pt)


def test_perlick_two_outside_annulus():
    spec = SystemSpec("PerlickII", 2, gamma="1", lam=1.0, delta=1.0)
    H = build(spec).H
    # U = r^-2 + r^2 - 2 vanishes at r = 1
    with pytest.raises(ps.SingularEvaluation):
        H(PhasePoint([1.0, 0.0], [0.1, 0.2]))


def test_singular_radius_of_perlick_two():
    sys_ = build(SystemSpec("PerlickII", 2, gamma="1/2", lam=0.3, delta=0.05))
    r0 = sys_.singular_radii[0]
    assert sys_.singular_distance(np.array([r0, 0.0, 0.0, 0.0])) == pytest.approx(0.0, abs=1e-12)


# --- canonical maps -------------------------------------------------------------------
def test_levi_civita_axis_points():
    a = levi_civita(PhasePoint([1.0, 0.0], [0.0, 0.0]))
    assert a.x == pytest.approx((0.5, 0.0))
    b = levi_civita(PhasePoint([1.0, 1.0], [0.0, 0.0]))
    assert b.x == pytest.approx((0.0, 1.0))


def test_levi_civita_rejects_origin_and_other_dimensions():
    with pytest.raises(ps.SingularEvaluation):
        levi_civita(PhasePoint([0.0, 0.0], [1.0, 0.0]))
    with pytest.raises(ps.DimensionMismatch):
        levi_civita(PhasePoint([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]))


@pytest.mark.parametrize("k,delta", [(0.0, 0.0), (0.1, 0.05), (-0.3, 0.02)])
def test_levi_civita_identity(k, delta):
    assert levi_civita_identity(k, delta, 1.0, 20, seed=4).max_rel < 1e-10


def test_identity_metamorphosis():
    T, U = darboux_ccm_parts(0.09, 0.05)
    one = Observable(2, lambda x, p: 1.0 + 0.0 * x[0], "one")
    V = Observable(2, lambda x, p: 0.3 * x[0] * x[0], "V")
    H = ccm(T, V, one, 0.0)
    pt = PhasePoint([0.6, -0.2], [0.4, 1.1])
    assert H(pt) == pytest.approx(T(pt) + V(pt), rel=1e-15)


@pytest.mark.parametrize("E", [0.7, -0.4])
def test_ccm_identity(E):
    assert ccm_identity(0.3, 0.05, E, 20, seed=5).max_rel < 1e-10


@pytest.mark.parametrize("beta", ["1/2", "2", "1/3", "3/2"])
def test_angular_rescale_identity(beta):
    assert angular_rescale_identity(beta, 0.1, 1.0, 20, seed=6).max_rel < 1e-10


def test_angular_rescale_example_point():
    amap = angular_rescale("1/2")
    r, th, pr, pth = amap.to_perlick(4.0, 0.2, 1.0, 0.5)
    assert r == pytest.approx(16.0)
    assert th == pytest.approx(0.4)
    assert amap.to_kepler(r, th, pr, pth) == pytest.approx((4.0, 0.2, 1.0, 0.5))


def _jet_polar(x, p):
    r = ps.sqrt(x[0] * x[0] + x[1] * x[1])
    th = ps.arctan(x[1] / x[0])
    return r, th, (x[0] * p[0] + x[1] * p[1]) / r, x[0] * p[1] - x[1] * p[0]


def _assert_canonical(q, pq, pt):
    obs = [Observable(2, f, n) for f, n in zip(q + pq, ["Q1", "Q2", "P1", "P2"])]
    Q, P = obs[:2], obs[2:]
    for i in range(2):
        for j in range(2):
            assert poisson_bracket(Q[i], P[j], pt) == pytest.approx(1.0 if i == j else 0.0, abs=1e-10)
            assert abs(poisson_bracket(Q[i], Q[j], pt)) < 1e-10
            assert abs(poisson_bracket(P[i], P[j], pt)) < 1e-10


def test_levi_civita_is_canonical():
    rng = np.random.default_rng(8)
    q = [lambda x, p, i=i: levi_civita_map(x, p)[0][i] for i in range(2)]
    pq = [lambda x, p, i=i: levi_civita_map(x, p)[1][i] for i in range(2)]
    for pt in ps.random_points(2, 10, rng):
        _assert_canonical(q, pq, pt)


def test_angular_rescale_is_canonical():
    amap = angular_rescale("2/3")
    rng = np.random.default_rng(9)

    def comp(i):
        return lambda x, p: amap.to_kepler(*_jet_polar(x, p))[i]

    q, pq = [comp(0), comp(1)], [comp(2), comp(3)]
    pts = [pt for pt in ps.random_points(2, 40, rng) if pt.x[0] > 0.2][:10]
    for pt in pts:
        _assert_canonical(q, pq, pt)


@pytest.mark.parametrize("gamma", ["1/2", "2", "3/2"])
def test_perlick_two_is_rescaled_metamorphosed_darboux(gamma):
    lam, delta, mu = 0.3, 0.05, 1.2
    g = float(Fraction(gamma))
    perlick = build(SystemSpec("PerlickII", 2, gamma=gamma, lam=lam, delta=delta, mu=mu)).H
    darboux = build(SystemSpec("DarbouxCCM", 2, lam=lam, delta=delta, E=mu / g**2)).H
    amap = angular_rescale(gamma)
    rng = np.random.default_rng(10)
    for _ in range(20):
        r, th = rng.uniform(0.6, 1.4), rng.uniform(-3, 3)
        pr, pth = rng.normal(size=2)
        lhs = perlick(polar(r, th, pr, pth))
        rhs = g * g * darboux(polar(*amap.to_kepler(r, th, pr, pth)))
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_rescale_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        angular_rescale("1/2").to_perlick(-1.0, 0.0, 0.0, 0.0)


def test_polar_round_trip():
    from superint.systems import cartesian_to_polar

    x, p = polar_to_cartesian(1.3, 2.0, -0.4, 0.9)
    assert cartesian_to_polar(x, p) == pytest.approx((1.3, 2.0, -0.4, 0.9))
    assert math.hypot(*x) == pytest.approx(1.3)
