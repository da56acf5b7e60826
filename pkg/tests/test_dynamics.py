import math
from fractions import Fraction

import numpy as np
import pytest

from superint.coalgebra import realize
from superint.dynamics import (
    IntegrationError,
    detect_closure,
    find_bounded_state,
    integrate,
    orbit_equation_residual,
    radial_period,
    radial_turning_times,
    relative_drift,
    time_reversal_error,
)
from superint.invariants import runge_lenz
from superint.phasespace import Observable, PhasePoint, SingularEvaluation
from superint.systems import HamiltonianObservable, SystemSpec, build, perlick_one_fn


def bounded(spec, **kw):
    system = build(spec)
    init = find_bounded_state(system, eccentricity=kw.pop("eccentricity", 0.2), **kw)
    assert init is not None
    return system, init


def test_relative_drift_conventions():
    assert relative_drift(np.array([2.0, 2.2, 1.9])) == pytest.approx(0.1)
    assert relative_drift(np.array([0.0, 1e-3])) == pytest.approx(1e-3)
    assert relative_drift(np.array([0.1, 0.2]), scale=10.0) == pytest.approx(0.01)


@pytest.mark.parametrize("tol", [1e-5, 1e-15])
def test_tolerance_range(tol):
    system, init = bounded(SystemSpec("KeplerCurved", 2))
    with pytest.raises(ValueError):
        integrate(system, init, 1.0, tol=tol)


def test_singular_initial_state_rejected():
    system = build(SystemSpec("KeplerCurved", 2))
    with pytest.raises(SingularEvaluation):
        integrate(system, PhasePoint([0.0, 0.0], [1.0, 0.0]), 1.0)


def test_radial_infall_stops_at_singularity():
    system = build(SystemSpec("KeplerCurved", 2))
    traj = integrate(system, PhasePoint([1.0, 0.0], [0.0, 0.0]), 5.0, tol=1e-10)
    assert traj.event is not None and traj.event["kind"] == "singular_approach"
    assert traj.times[-1] < 5.0


def test_curved_kepler_energy_drift():
    system, init = bounded(SystemSpec("KeplerCurved", 2, k=0.1))
    probe = integrate(system, init, 30.0)
    T = radial_period(probe)
    traj = integrate(system, init, 10.5 * T)
    assert radial_turning_times(traj, "min").size >= 10
    assert traj.energy_drift() < 1e-10
    assert traj.stats["method"] == "DOP853"


def test_perlick_two_conservation():
    spec = SystemSpec("PerlickII", 2, gamma="1", lam=0.2, delta=0.05)
    system, init = bounded(spec)
    inv = runge_lenz(system)
    traj = integrate(system, init, 60.0, invariants=inv.registered())
    assert traj.drift("H") < 1e-9
    assert traj.drift("L12") < 1e-9


def test_flat_kepler_third_law():
    system = build(SystemSpec("KeplerCurved", 2))
    init = PhasePoint([1.0, 0.0], [0.0, 1.2])
    E = float(system.H(init))
    a = -1.0 / (2.0 * E)
    period = 2 * math.pi * a**1.5
    traj = integrate(system, init, 1.5 * period)
    res = detect_closure(traj, 1e-5)
    assert res.closed
    assert res.period == pytest.approx(period, rel=1e-5)


def test_closure_period_is_rational_in_radial_period():
    system, init = bounded(SystemSpec("PerlickI", 2, beta="3/2"))
    T = radial_period(integrate(system, init, 40.0))
    res = detect_closure(integrate(system, init, 4 * T), 1e-5)
    assert res.closed
    ratio = Fraction(res.period / res.radial_period).limit_denominator(5)
    assert abs(float(ratio) - res.period / res.radial_period) < 1e-4
    assert ratio.denominator <= 5


def test_unbounded_orbit_is_not_closed():
    system = build(SystemSpec("KeplerCurved", 2))
    traj = integrate(system, PhasePoint([1.0, 0.0], [0.3, 1.5]), 30.0)
    res = detect_closure(traj)
    assert not res.closed and not res.bounded


def test_irrational_exponent_does_not_close_quickly():
    real = realize(2)
    H = Observable(2, perlick_one_fn(real, 1.0 / math.sqrt(2.0), 0.0, 1.0), "H_irr")
    system = HamiltonianObservable(None, H, real)
    init = find_bounded_state(system, eccentricity=0.2)
    T = radial_period(integrate(system, init, 40.0))
    res = detect_closure(integrate(system, init, 8 * T), 1e-5)
    assert not res.closed
    assert res.miss_distance > 1e-3


@pytest.mark.parametrize("k,delta", [(0.0, 0.0), (0.1, 0.05)])
def test_orbit_equation(k, delta):
    system, init = bounded(SystemSpec("KeplerCurved", 2, k=k, delta=delta))
    traj = integrate(system, init, 40.0)
    assert orbit_equation_residual(traj, k, 1.0, delta) < 1e-8


def test_orbit_equation_needs_planar_trajectory():
    system, init = bounded(SystemSpec("KeplerCurved", 3))
    with pytest.raises(ValueError):
        orbit_equation_residual(integrate(system, init, 1.0), 0.0, 1.0)


def test_time_reversal():
    system, init = bounded(SystemSpec("PerlickI", 2, beta="1/2", k=0.1))
    T = radial_period(integrate(system, init, 40.0))
    assert time_reversal_error(system, init, T, 1e-12) < 1e-11


def test_bounded_state_in_three_dimensions_is_not_planar():
    system, init = bounded(SystemSpec("PerlickI", 3, beta="2"))
    assert init.x[2] != 0.0 and init.p[2] != 0.0


def test_no_bounded_state_without_attraction():
    system = build(SystemSpec("PerlickII", 2, gamma="1/2", lam=0.5, delta=0.0))
    assert find_bounded_state(system) is None


def test_trajectory_csv(tmp_path):
    system, init = bounded(SystemSpec("PerlickI", 2, beta="1/2"))
    traj = integrate(system, init, 2.0, invariants=runge_lenz(system).registered())
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:6] == ["t", "x1", "x2", "p1", "p2", "H"]
    assert len(lines) == traj.times.size + 1
    first = lines[1].split(",")
    assert float(first[1]) == init.x[0]


def test_integration_error_carries_state():
    err = IntegrationError("boom", 1.5, np.zeros(4))
    assert "t=1.5" in str(err) and err.state.shape == (4,)
