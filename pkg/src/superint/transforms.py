"""Pointwise checks of the canonical maps relating the system families.

Each check samples random planar phase points and reports the worst relative
mismatch together with the point where it occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .systems import (
    SystemSpec,
    angular_rescale,
    build,
    cartesian_to_polar,
    darboux_ccm_parts,
    darboux_pre_ccm,
    levi_civita_map,
    polar_to_cartesian,
)

__all__ = [
    "IdentityReport",
    "levi_civita_identity",
    "ccm_identity",
    "angular_rescale_identity",
    "darboux_ccm_display",
]


@dataclass
class IdentityReport:
    name: str
    params: dict
    num_points: int
    seed: int
    max_rel: float = 0.0
    worst_point: list[float] | None = None
    values: list[tuple[float, float]] = field(default_factory=list, repr=False)

    def record(self, z: np.ndarray, lhs: float, rhs: float, scale: float | None = None) -> None:
        scale = max(abs(lhs), abs(rhs)) if scale is None else scale
        rel = abs(lhs - rhs) / max(scale, 1e-300)
        self.values.append((lhs, rhs))
        if rel >= self.max_rel:
            self.max_rel = float(rel)
            self.worst_point = [float(v) for v in z]

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_rel < tol

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params, "num_points": self.num_points, "seed": self.seed,
                "max_rel": self.max_rel, "worst_point": self.worst_point}


def _planar_points(rng: np.random.Generator, count: int, radius=(0.5, 1.5)):
    for _ in range(count):
        r = rng.uniform(*radius)
        th = rng.uniform(-math.pi, math.pi)
        x = np.array([r * math.cos(th), r * math.sin(th)])
        yield x, rng.normal(size=2)


def levi_civita_identity(k: float, delta: float, mu: float = 1.0, num_points: int = 20,
                         seed: int = 0) -> IdentityReport:
    """Curved Kepler composed with the Levi-Civita map against the Darboux form.

    The Darboux side has ``lambda^2 = -k/4`` and coupling ``2 mu``.
    """
    kepler = build(SystemSpec("KeplerCurved", 2, k=k, delta=delta, mu=mu)).H
    darboux = darboux_pre_ccm(-k / 4.0, delta, 2.0 * mu)
    rep = IdentityReport("levi_civita", {"k": k, "delta": delta, "mu": mu}, num_points, seed)
    for x, p in _planar_points(np.random.default_rng(seed), num_points):
        X, P = levi_civita_map(x, p)
        z = np.concatenate((x, p))
        rep.record(z, float(kepler(np.concatenate((X, P)))), float(darboux(z)))
    return rep


def darboux_ccm_display(lam: float, delta: float, E: float, x, p) -> float:
    """Metamorphosed Darboux Hamiltonian written out in polar variables."""
    r, _, pr, pth = cartesian_to_polar(x, p)
    u = r**-2 + lam * lam * r * r - 2.0 * delta
    w = r**-2 - lam * lam * r * r
    return w * w * r * r / (2.0 * u) * (pr * pr + pth * pth / (r * r)) + E / u


def ccm_identity(lam: float, delta: float, E: float, num_points: int = 20, seed: int = 0) -> IdentityReport:
    """Metamorphosis of the Darboux form: level-set swap and closed form.

    At every point ``H~`` (built by the metamorphosis) must equal the explicit
    polar expression, and the pre-metamorphosis Hamiltonian with coupling
    ``mu~ = H~(z)`` must take the value ``-E`` there. Both mismatches are
    recorded; the report keeps the worst.
    """
    T, U = darboux_ccm_parts(lam * lam, delta)
    Ht = build(SystemSpec("DarbouxCCM", 2, lam=lam, delta=delta, E=E)).H
    rep = IdentityReport("ccm", {"lam": lam, "delta": delta, "E": E}, num_points, seed)
    rng = np.random.default_rng(seed)
    got = 0
    while got < num_points:
        ((x, p),) = _planar_points(rng, 1)
        z = np.concatenate((x, p))
        if float(U(z)) <= 1e-3:
            continue
        ht = float(Ht(z))
        rep.record(z, ht, darboux_ccm_display(lam, delta, E, x, p))
        pre = float(darboux_pre_ccm(lam * lam, delta, ht)(z))
        # compare H_pre + E = 0 on the scale of its two terms
        scale = abs(float(T(z))) + abs(ht * float(U(z)))
        rep.record(z, pre, -E, scale)
        got += 1
    return rep


def angular_rescale_identity(beta, k: float, mu: float = 1.0, num_points: int = 20,
                             seed: int = 0) -> IdentityReport:
    """``H_PerlickI`` after the angular rescale equals ``beta^2`` times curved Kepler with ``mu/beta^2``."""
    amap = angular_rescale(beta)
    b = float(amap.beta)
    perlick = build(SystemSpec("PerlickI", 2, k=k, mu=mu, beta=amap.beta)).H
    kepler = build(SystemSpec("KeplerCurved", 2, k=k, mu=mu / b**2)).H
    rep = IdentityReport("angular_rescale", {"beta": str(amap.beta), "k": k, "mu": mu}, num_points, seed)
    for x, p in _planar_points(np.random.default_rng(seed), num_points):
        r, th, pr, pth = cartesian_to_polar(x, p)
        X, P = polar_to_cartesian(*amap.to_perlick(r, th, pr, pth))
        z = np.concatenate((x, p))
        rep.record(z, float(perlick(np.concatenate((X, P)))), b * b * float(kepler(z)))
    return rep
