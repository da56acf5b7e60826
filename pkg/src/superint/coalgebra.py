"""sl(2) Poisson coalgebra realizations under the trivial coproduct.

The l-site generators act on the first l coordinates (left ordering), so the
left Casimirs ``C^(l) = J+^(l) J-^(l) - (J3^(l))^2`` are nested: ``C^(N)`` is
the squared total angular momentum and ``C^(1)`` vanishes for the Cartesian
realization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .phasespace import Observable, PhasePoint, poisson_bracket, random_points

__all__ = ["Sl2Realization", "realize", "verify_coalgebra_relations", "CoalgebraReport"]

CENTRIFUGAL_FLOOR = 0.1


@dataclass(frozen=True)
class Sl2Realization:
    """Generator triple and left Casimirs of an N-site realization.

    ``b`` holds the centrifugal coefficients; all zeros is the Cartesian
    realization ``J- = x.x``, ``J+ = p.p``, ``J3 = x.p``.
    """

    dim: int
    kind: str = "cartesian"
    b: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("realization needs N >= 1")
        if self.kind not in ("cartesian", "centrifugal"):
            raise ValueError(f"unknown realization kind {self.kind!r}")
        if self.kind == "centrifugal":
            if len(self.b) != self.dim:
                raise ValueError(f"centrifugal realization needs {self.dim} coefficients, got {len(self.b)}")
        else:
            object.__setattr__(self, "b", (0.0,) * self.dim)

    @property
    def singular_coordinates(self) -> tuple[int, ...]:
        return tuple(i for i, bi in enumerate(self.b) if bi != 0.0)

    # --- function-level access, used inside other observables -------------
    def site(self, x, p, i: int):
        """One-site generators (J-, J+, J3) of coordinate ``i``."""
        jm = x[i] * x[i]
        jp = p[i] * p[i]
        if self.b[i] != 0.0:
            jp = jp + self.b[i] ** 2 / jm
        return jm, jp, x[i] * p[i]

    def generators(self, x, p, sites: int | None = None):
        """(J-, J+, J3) on the first ``sites`` coordinates (default: all)."""
        l = self.dim if sites is None else sites
        jm, jp, j3 = self.site(x, p, 0)
        for i in range(1, l):
            a, b, c = self.site(x, p, i)
            jm, jp, j3 = jm + a, jp + b, j3 + c
        return jm, jp, j3

    def casimir_value(self, x, p, sites: int | None = None):
        jm, jp, j3 = self.generators(x, p, sites)
        return jp * jm - j3 * j3

    # --- observables ------------------------------------------------------
    def J_minus(self, sites: int | None = None) -> Observable:
        return Observable(self.dim, lambda x, p: self.generators(x, p, sites)[0], _label("J-", sites))

    def J_plus(self, sites: int | None = None) -> Observable:
        return Observable(self.dim, lambda x, p: self.generators(x, p, sites)[1], _label("J+", sites))

    def J3(self, sites: int | None = None) -> Observable:
        return Observable(self.dim, lambda x, p: self.generators(x, p, sites)[2], _label("J3", sites))

    def casimir(self, sites: int | None = None) -> Observable:
        return Observable(self.dim, lambda x, p: self.casimir_value(x, p, sites), _label("C", sites))

    @property
    def casimirs(self) -> list[Observable]:
        return [self.casimir(l) for l in range(1, self.dim + 1)]

    def sample(self, count: int, rng: np.random.Generator) -> list[PhasePoint]:
        return random_points(self.dim, count, rng, min_abs_coordinate=self.sampling_floor)

    @property
    def sampling_floor(self) -> float:
        # absolute tolerances need O(1) brackets, so stay clear of the 1/x_i^2 walls
        return CENTRIFUGAL_FLOOR if self.singular_coordinates else 0.0

    def to_json(self) -> dict:
        out = {"dim": self.dim, "kind": self.kind}
        if self.kind == "centrifugal":
            out["b"] = list(self.b)
        return out


def _label(base: str, sites: int | None) -> str:
    return base if sites is None else f"{base}^({sites})"


def realize(dim: int, kind: str = "cartesian", b: Sequence[float] | None = None) -> Sl2Realization:
    if kind == "centrifugal":
        if b is None:
            raise ValueError("centrifugal realization needs coefficients b")
        return Sl2Realization(dim, kind, tuple(float(v) for v in b))
    return Sl2Realization(dim, kind)


@dataclass
class CoalgebraReport:
    realization: dict
    num_points: int
    seed: int
    min_abs_coordinate: float
    relations: dict[str, float] = field(default_factory=dict)
    worst_points: dict[str, list[float]] = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        return max(self.relations.values()) if self.relations else 0.0

    def to_json(self) -> dict:
        return {
            "realization": self.realization,
            "num_points": self.num_points,
            "seed": self.seed,
            "min_abs_coordinate": self.min_abs_coordinate,
            "max_violation": self.max_violation,
            "relations": self.relations,
            "worst_points": self.worst_points,
        }


def verify_coalgebra_relations(real: Sl2Realization, num_points: int = 100, seed: int = 0) -> CoalgebraReport:
    """Max absolute violation of the nested sl(2) relations and Casimir centrality.

    For every ``i <= j <= N``::

        {J3^(i), J+^(j)} = 2 J+^(i)
        {J3^(i), J-^(j)} = -2 J-^(i)
        {J-^(i), J+^(j)} = 4 J3^(i)

    and ``{C^(l), J^(N)} = 0`` for every l and generator.
    """
    rng = np.random.default_rng(seed)
    pts = real.sample(num_points, rng)
    N = real.dim
    jm = [real.J_minus(l) for l in range(1, N + 1)]
    jp = [real.J_plus(l) for l in range(1, N + 1)]
    j3 = [real.J3(l) for l in range(1, N + 1)]
    cas = real.casimirs
    rel: dict[str, float] = {}
    where: dict[str, list[float]] = {}
    pt = None

    def bump(key, val):
        if key not in rel or abs(val) > rel[key]:
            rel[key] = float(abs(val))
            where[key] = [float(c) for c in pt.as_array()]

    for pt in pts:
        jets = {
            name: [o.jet(pt) for o in group]
            for name, group in (("m", jm), ("p", jp), ("3", j3), ("C", cas))
        }
        g = lambda name, i: jets[name][i].g  # noqa: E731
        v = lambda name, i: jets[name][i].v  # noqa: E731

        def pb(a, i, b, j):
            ga, gb = g(a, i), g(b, j)
            return ga[:N] @ gb[N:] - gb[:N] @ ga[N:]

        for i in range(N):
            for j in range(i, N):
                bump("{J3^i,J+^j}-2J+^i", pb("3", i, "p", j) - 2 * v("p", i))
                bump("{J3^i,J-^j}+2J-^i", pb("3", i, "m", j) + 2 * v("m", i))
                bump("{J-^i,J+^j}-4J3^i", pb("m", i, "p", j) - 4 * v("3", i))
        top = N - 1
        for l in range(N):
            for gen in ("m", "p", "3"):
                bump(f"{{C^({l + 1}),J{gen}^N}}", pb("C", l, gen, top))
    return CoalgebraReport(real.to_json(), num_points, seed, real.sampling_floor, rel, where)


def check_sl2(real: Sl2Realization, pt: PhasePoint) -> tuple[float, float, float]:
    """Base sl(2) relations at one point: residuals of {J3,J+}-2J+, {J3,J-}+2J-, {J-,J+}-4J3."""
    jm, jp, j3 = real.J_minus(), real.J_plus(), real.J3()
    return (
        poisson_bracket(j3, jp, pt) - 2 * jp(pt),
        poisson_bracket(j3, jm, pt) + 2 * jm(pt),
        poisson_bracket(jm, jp, pt) - 4 * j3(pt),
    )
