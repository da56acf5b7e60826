"""Trajectories from Hamilton's equations, closure detection and drift logs.

Integration uses an adaptive 8th-order embedded Runge-Kutta scheme with dense
output rather than a symplectic method: conserved-quantity drift is the thing
being measured, so the integrator must not conserve anything by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .phasespace import Observable, PhasePoint, SingularEvaluation
from .systems import HamiltonianObservable

__all__ = [
    "Trajectory",
    "IntegrationError",
    "integrate",
    "ClosureResult",
    "detect_closure",
    "radial_turning_times",
    "radial_period",
    "relative_drift",
    "find_bounded_state",
    "SINGULAR_MARGIN",
    "orbit_equation_residual",
    "time_reversal_error",
]

SINGULAR_MARGIN = 1e-6


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(f"{message} (t={t:.6g})")
        self.t = t
        self.state = state


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dim: int
    logs: dict[str, np.ndarray] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    event: dict | None = None
    dense: Callable | None = field(default=None, repr=False)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, : self.dim]

    @property
    def p(self) -> np.ndarray:
        return self.states[:, self.dim:]

    @property
    def radius(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)

    def drift(self, name: str) -> float:
        """Relative drift of a logged quantity.

        Real and imaginary parts of a complex invariant are measured against
        its modulus, since either part alone may sit near zero.
        """
        series = self.logs[name]
        partner = _COMPLEX_PARTS.get(name)
        if partner and partner in self.logs:
            modulus = np.hypot(series, self.logs[partner])
            return relative_drift(series, scale=float(np.max(modulus)))
        return relative_drift(series)

    def drifts(self) -> dict[str, float]:
        return {name: self.drift(name) for name in self.logs}

    def energy_drift(self) -> float:
        return self.drift("H")

    def to_csv(self, path, float_format: str = "%.17g") -> None:
        n = self.dim
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        cols = [self.times[:, None], self.states]
        names = list(self.logs)
        if "H" in names:
            names.remove("H")
            names.insert(0, "H")
        header += names
        cols += [np.real(self.logs[k])[:, None] for k in names]
        np.savetxt(path, np.hstack(cols), delimiter=",", header=",".join(header), comments="",
                   fmt=float_format)


_COMPLEX_PARTS = {"Re_S": "Im_S", "Im_S": "Re_S"}


def relative_drift(series: np.ndarray, scale: float | None = None) -> float:
    """max |f(t) - f(0)| / scale, with scale defaulting to |f(0)|.

    Quantities that vanish initially fall back to an absolute measure.
    """
    s = np.asarray(series)
    if scale is None:
        scale = abs(s[0])
    scale = scale if scale > 1e-300 else 1.0
    return float(np.max(np.abs(s - s[0])) / scale)


def _hamilton_rhs(H: Observable):
    n = H.dim

    def rhs(t, z):
        g = H.jet(z).g
        return np.concatenate((g[n:], -g[:n]))

    return rhs


def integrate(
    system: HamiltonianObservable,
    init: PhasePoint | np.ndarray,
    t_final: float,
    tol: float = 1e-12,
    invariants: Mapping[str, Observable] | None = None,
    max_step: float = np.inf,
    atol: float | None = None,
) -> Trajectory:
    """Integrate Hamilton's equations from ``init`` to ``t_final`` (negative runs backward).

    ``tol`` is the relative tolerance; the absolute one defaults to ``tol / 100``
    since phase-space coordinates are O(1). Stops early, recording ``event``, if the state comes within 1e-6 of a
    singular locus of the system.
    """
    if not 1e-14 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-14, 1e-6]")
    z0 = init.as_array() if isinstance(init, PhasePoint) else np.asarray(init, dtype=float)
    if system.singular_distance(z0) <= SINGULAR_MARGIN:
        raise SingularEvaluation(system.H.name, "initial state on a singular locus")
    rhs = _hamilton_rhs(system.H)
    atol = tol * 1e-2 if atol is None else atol

    def near_singular(t, z):
        return system.singular_distance(z) - SINGULAR_MARGIN

    near_singular.terminal = True
    try:
        sol = solve_ivp(rhs, (0.0, t_final), z0, method="DOP853", rtol=tol, atol=atol,
                        dense_output=True, events=near_singular, max_step=max_step)
    except SingularEvaluation as exc:
        raise IntegrationError(str(exc), float("nan"), z0) from exc
    if sol.status == -1:
        raise IntegrationError(sol.message, float(sol.t[-1]), sol.y[:, -1])
    event = None
    if sol.status == 1:
        event = {"kind": "singular_approach", "t": float(sol.t_events[0][0]),
                 "state": sol.y_events[0][0].tolist()}
    traj = Trajectory(
        times=sol.t.copy(),
        states=sol.y.T.copy(),
        dim=system.dim,
        stats={"steps": int(sol.t.size - 1), "nfev": int(sol.nfev), "rtol": tol,
               "atol": atol, "method": "DOP853"},
        event=event,
        dense=sol.sol,
    )
    obs = {"H": system.H}
    if invariants:
        obs.update(invariants)
    for name, o in obs.items():
        traj.logs[name] = np.array([o.value(z) for z in traj.states])
    return traj


# --- radial structure ---------------------------------------------------------
def _radial_velocity(z: np.ndarray, n: int) -> float:
    return float(z[:n] @ z[n:])


def radial_turning_times(traj: Trajectory, kind: str = "min") -> np.ndarray:
    """Times of radial minima (``kind='min'``) or maxima, refined on the dense output.

    Uses the sign of ``x.p``; valid for Hamiltonians whose radial velocity has
    the sign of ``x.p`` (all families here have positive kinetic factors).
    """
    n = traj.dim
    xp = np.einsum("ij,ij->i", traj.x, traj.p)
    out = []
    for i in range(xp.size - 1):
        a, b = xp[i], xp[i + 1]
        hit = (a < 0 <= b) if kind == "min" else (a > 0 >= b)
        if not hit:
            continue
        t0, t1 = traj.times[i], traj.times[i + 1]
        f = lambda t: _radial_velocity(traj.dense(t), n)  # noqa: E731
        from scipy.optimize import brentq

        fa, fb = f(t0), f(t1)
        if fa == 0:
            out.append(t0)
        elif fa * fb < 0:
            out.append(brentq(f, t0, t1, xtol=1e-14, rtol=1e-15))
    return np.array(out)


def radial_period(traj: Trajectory) -> float | None:
    t = radial_turning_times(traj, "min")
    if t.size < 2:
        return None
    return float(np.mean(np.diff(t)))


@dataclass
class ClosureResult:
    closed: bool
    period: float | None
    miss_distance: float
    bounded: bool = True
    radial_period: float | None = None
    candidates: list[tuple[float, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "closed": self.closed,
            "period": self.period,
            "miss_distance": self.miss_distance,
            "bounded": self.bounded,
            "radial_period": self.radial_period,
            "period_over_radial": (self.period / self.radial_period
                                   if self.period and self.radial_period else None),
        }


def _phase_metric(traj: Trajectory, energy: float):
    scale = math.sqrt(2.0 * abs(energy)) if energy != 0 else 1.0
    n = traj.dim
    z0 = traj.states[0].copy()

    def dist2(z):
        dx = z[:n] - z0[:n]
        dp = (z[n:] - z0[n:]) / scale
        return float(dx @ dx + dp @ dp)

    return dist2


def detect_closure(traj: Trajectory, tol: float = 1e-5) -> ClosureResult:
    """Earliest return of the trajectory to its initial phase point.

    Distance is Euclidean over (x, p / sqrt(2|E|)). Local minima of the sampled
    distance are refined on the dense output; the earliest one below ``tol``
    is the period. An orbit without two radial turning points is reported as
    not bounded.
    """
    rmin_t = radial_turning_times(traj, "min")
    rmax_t = radial_turning_times(traj, "max")
    if rmin_t.size + rmax_t.size < 2 or traj.event is not None:
        return ClosureResult(False, None, float("inf"), bounded=False)
    energy = float(traj.logs["H"][0])
    d2 = _phase_metric(traj, energy)
    # sample the dense output finely enough to resolve every return
    t_end = traj.times[-1]
    n_samples = max(4000, 40 * traj.times.size)
    ts = np.linspace(0.0, t_end, n_samples)
    zs = traj.dense(ts).T
    ds = np.array([d2(z) for z in zs])
    # skip the initial basin: wait until the orbit has moved away
    far = np.nonzero(ds > 4.0 * ds[1:50].max())[0] if n_samples > 50 else np.array([1])
    start = int(far[0]) if far.size else n_samples
    candidates = []
    for i in range(max(start, 1), n_samples - 1):
        if ds[i] <= ds[i - 1] and ds[i] <= ds[i + 1]:
            res = minimize_scalar(lambda t: d2(traj.dense(t)), bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded", options={"xatol": 1e-12})
            candidates.append((float(res.x), math.sqrt(max(res.fun, 0.0))))
    radial = radial_period(traj)
    if not candidates:
        return ClosureResult(False, None, float("inf"), True, radial)
    for t_star, miss in candidates:
        if miss < tol:
            return ClosureResult(True, t_star, miss, True, radial, candidates)
    best = min(candidates, key=lambda c: c[1])
    return ClosureResult(False, None, best[1], True, radial, candidates)


def find_bounded_state(system: HamiltonianObservable, L: float = 1.0, r_range=(0.05, 20.0),
                       eccentricity: float = 0.1, num: int = 4000,
                       angle: float = 0.0) -> PhasePoint | None:
    """Initial state near the minimum of the effective radial potential.

    Scans ``H`` at radius r along the in-plane direction ``angle`` (measured from
    the x1 axis toward x2) with tangential momentum L/r, for an interior local
    minimum over ``r_range``. The state starts there with a radial kick of
    ``eccentricity * L / r``. Returns None when no minimum is found (no bound
    orbits in that window).
    """
    n = system.dim
    e_r = np.zeros(n)
    e_t = np.zeros(n)
    e_r[0], e_r[1] = math.cos(angle), math.sin(angle)
    e_t[0], e_t[1] = -math.sin(angle), math.cos(angle)

    def state(r, kick):
        x = r * e_r
        p = (L / r) * e_t + kick * (L / r) * e_r
        if n > 2:
            # tilt the orbital plane so every axis participates
            x = x.copy()
            p = p.copy()
            x[2] = 0.3 * r
            p[2] = -0.1 * L / r
        return x, p

    rs = np.geomspace(*r_range, num)
    vals = np.full(num, np.nan)
    for i, r in enumerate(rs):
        x, p = state(r, 0.0)
        z = np.concatenate((x, p))
        if system.singular_distance(z) < 1e-3:
            continue
        try:
            vals[i] = float(np.real(system.H.value(z)))
        except SingularEvaluation:
            continue
    interior = [i for i in range(1, num - 1)
                if np.isfinite(vals[i - 1:i + 2]).all() and vals[i] < vals[i - 1] and vals[i] < vals[i + 1]]
    if not interior:
        return None
    x, p = state(rs[interior[0]], eccentricity)
    return PhasePoint(x, p)


# --- checks -----------------------------------------------------------------
def orbit_equation_residual(traj: Trajectory, k: float, mu: float, delta: float = 0.0) -> float:
    """Max deviation from the closed-form orbit of the curved Kepler system.

    With ``u = (1 - k r^2)/r`` and ``D = sqrt(2 E L^2 - 8 mu delta L^2 - 4 k L^4 + mu^2)``
    the planar orbit satisfies ``cos(theta - theta0) = (L^2 u - mu)/D`` and
    ``sin(theta - theta0) = (1 + k r^2) L p_r / D``. ``theta0`` is fixed by the
    first sample; the returned value is the larger of the two residuals.
    """
    if traj.dim != 2:
        raise ValueError("orbit equation is checked on planar trajectories")
    x, y = traj.x[:, 0], traj.x[:, 1]
    px, py = traj.p[:, 0], traj.p[:, 1]
    r = np.hypot(x, y)
    theta = np.unwrap(np.arctan2(y, x))
    L = x * py - y * px
    pr = (x * px + y * py) / r
    E = float(np.real(traj.logs["H"][0]))
    L0 = L[0]
    D = math.sqrt(2 * E * L0**2 - 8 * mu * delta * L0**2 - 4 * k * L0**4 + mu**2)
    c = (L0**2 * (1 - k * r**2) / r - mu) / D
    s = (1 + k * r**2) * L0 * pr / D
    theta0 = theta[0] - math.atan2(s[0], c[0])
    res_c = np.abs(np.cos(theta - theta0) - c)
    res_s = np.abs(np.sin(theta - theta0) - s)
    return float(max(res_c.max(), res_s.max()))


def time_reversal_error(system: HamiltonianObservable, init: PhasePoint, t_final: float,
                        tol: float = 1e-12) -> float:
    """Phase-space distance between ``init`` and the forward-then-backward image."""
    fwd = integrate(system, init, t_final, tol)
    back = integrate(system, fwd.states[-1], -fwd.times[-1], tol)
    return float(np.max(np.abs(back.states[-1] - fwd.states[0])))
