import numpy as np
import pytest

from superint import phasespace as ps
from superint.invariants import (
    angular_momentum,
    ccm_invariant,
    commutation_scan,
    expanded_lrl,
    flat_lrl,
    im_s_display,
    im_s_scaled_display,
    jacobian_rank,
    re_s_display,
    rotate_component,
    runge_lenz,
    verify_commutation,
)
from superint.phasespace import Observable, PhasePoint
from superint.systems import SystemSpec, build


def test_circular_orbit_has_no_eccentricity():
    lrl = Observable(2, flat_lrl(1.0), "A1")
    assert lrl(PhasePoint([1.0, 0.0], [0.0, 1.0])) == pytest.approx(0.0, abs=1e-15)


def test_hamiltonian_with_itself():
    system = build(SystemSpec("KeplerCurved", 2, k=0.1))
    assert verify_commutation(system, system.H) == 0.0


@pytest.mark.parametrize("family,k", [("KeplerCurved", 0.0), ("KeplerCurved", 0.1), ("PerlickI", 0.0), ("PerlickI", 0.1)])
@pytest.mark.parametrize("dim", [2, 3])
def test_quadratic_invariants_commute(family, k, dim):
    system = build(SystemSpec(family, dim, k=k))
    inv = runge_lenz(system)
    for obs in list(inv.angular.values()) + [inv.S.real, inv.S.imag]:
        assert verify_commutation(system, obs, 50, seed=11) < 1e-10
    im_scaled = Observable(dim, im_s_scaled_display(k, 1.0), "sqrtC ImS")
    assert verify_commutation(system, im_scaled, 50, seed=11) < 1e-10


def test_perlick_one_beta_two_in_three_dimensions():
    system = build(SystemSpec("PerlickI", 3, beta="2", k=0.1))
    inv = runge_lenz(system)
    assert verify_commutation(system, angular_momentum(3, 0, 1)) < 1e-10
    assert verify_commutation(system, inv.higher_re) < 1e-8


@pytest.mark.parametrize("beta", ["1/2", "2", "1/3", "3/2"])
@pytest.mark.parametrize("dim", [2, 3])
def test_higher_invariant_scale_free_bracket(beta, dim):
    system = build(SystemSpec("PerlickI", dim, beta=beta, k=0.1))
    inv = runge_lenz(system)
    for obs in (inv.higher_re, inv.higher_im):
        worst, where = commutation_scan(system, obs, 30, seed=3, relative=True)
        assert worst < 1e-12
        assert where is not None


@pytest.mark.parametrize("gamma", ["1/2", "2", "3/2"])
def test_perlick_two_higher_invariant(gamma):
    system = build(SystemSpec("PerlickII", 2, gamma=gamma, lam=0.3, delta=0.05))
    inv = runge_lenz(system)
    assert commutation_scan(system, inv.higher_re, 30, seed=4, radius=(0.6, 1.2), relative=True)[0] < 1e-12


def test_ttw_invariants():
    system = build(SystemSpec("TTWCurved", beta="1/2", k=0.1, b1=0.3, b2=0.5))
    inv = runge_lenz(system)
    assert "C" in inv.registered()
    for obs in (inv.higher_re, inv.higher_im, inv.angular[(0, 1)]):
        assert commutation_scan(system, obs, 30, seed=5, relative=True)[0] < 1e-12


def test_metamorphosed_invariant_commutes():
    lam, delta, E = 0.3, 0.05, 0.7
    Ht, St = ccm_invariant(lam, delta, E)
    system = build(SystemSpec("DarbouxCCM", 2, lam=lam, delta=delta, E=E))
    for obs in (St.real, St.imag):
        assert commutation_scan(system, obs, 30, seed=6, radius=(0.5, 1.5), relative=True)[0] < 1e-10


def test_displays_agree_with_built_invariant():
    k, mu = 0.1, 1.0
    system = build(SystemSpec("KeplerCurved", 2, k=k, mu=mu))
    S = runge_lenz(system).S
    re_d = Observable(2, re_s_display(k, mu), "re")
    im_d = Observable(2, im_s_display(k, mu), "im")
    im_scaled = Observable(2, im_s_scaled_display(k, mu), "im_scaled")
    cas = system.realization.casimir()
    lrl = Observable(2, expanded_lrl(k, mu), "lrl")
    for pt in ps.random_points(2, 20, np.random.default_rng(7)):
        s = S(pt)
        assert s.real == pytest.approx(re_d(pt), rel=1e-10, abs=1e-12)
        assert s.imag == pytest.approx(im_d(pt), rel=1e-10, abs=1e-12)
        assert im_d(pt) * np.sqrt(cas(pt)) == pytest.approx(im_scaled(pt), rel=1e-10, abs=1e-12)
        assert re_d(pt) == pytest.approx(lrl(pt), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("beta", ["1", "1/2", "2"])
@pytest.mark.parametrize("dim", [2, 3])
def test_functional_independence(beta, dim):
    system = build(SystemSpec("PerlickI", dim, beta=beta, k=0.1))
    inv = runge_lenz(system)
    comps = [system.H, *inv.angular.values(), inv.higher_re]
    if dim == 3:
        comps.append(rotate_component(inv.higher_re, 0, 1))
    for pt in ps.random_points(dim, 20, np.random.default_rng(8)):
        assert jacobian_rank(comps, pt) == 2 * dim - 1


def test_rotated_component_is_conserved():
    system = build(SystemSpec("KeplerCurved", 3, k=0.1))
    inv = runge_lenz(system)
    second = rotate_component(inv.S.real, 0, 1)
    assert verify_commutation(system, second, 30, seed=9) < 1e-10


def test_axis_validation():
    with pytest.raises(ValueError):
        runge_lenz(build(SystemSpec("KeplerCurved", 2)), axis=2)
