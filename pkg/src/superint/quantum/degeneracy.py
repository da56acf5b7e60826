"""Isoenergetic families of the rational-beta spectrum and the sector map between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


from .ladder import LadderSet, eigen_residual, excited_state, ladder_set
from .radial import RadialProblem, energy, is_bound, principal

__all__ = ["DegeneracyGroup", "degeneracy", "beta_ladder", "BetaLadderResult"]


@dataclass
class DegeneracyGroup:
    nu: Fraction
    energy: float
    members: list[tuple[int, int]] = field(default_factory=list)

    def follows_progression(self, beta: Fraction) -> bool:
        """Members, ordered by decreasing l, step by ``(+m1, -m2)`` for ``beta = m2/m1``."""
        m2, m1 = beta.numerator, beta.denominator
        ms = sorted(self.members, key=lambda nl: -nl[1])
        return all(b[0] - a[0] == m1 and a[1] - b[1] == m2 for a, b in zip(ms, ms[1:]))

    def to_json(self) -> dict:
        return {"nu": str(self.nu), "energy": self.energy, "members": [list(m) for m in self.members]}


def degeneracy(prob: RadialProblem, E_window: tuple[float, float], n_max: int = 30,
               l_max: int = 30) -> list[DegeneracyGroup]:
    """Bound ``(n, l)`` with closed-form energy in ``E_window``, grouped by exactly equal level.

    Equality is decided on the exact rational principal number
    ``nu = l/beta + n + (N-2)/(2 beta) + 1/2``; the energy is monotone in nu.
    """
    lo, hi = E_window
    groups: dict[Fraction, DegeneracyGroup] = {}
    for l in range(l_max + 1):
        for n in range(n_max + 1):
            if not is_bound(n, l, prob):
                continue
            e = energy(n, l, prob)
            if lo <= e <= hi:
                nu = principal(n, prob.with_l(l))
                groups.setdefault(nu, DegeneracyGroup(nu, e)).members.append((n, l))
    out = sorted(groups.values(), key=lambda g: g.nu)
    for g in out:
        g.members.sort(key=lambda nl: -nl[1])
    return out


@dataclass
class BetaLadderResult:
    source: tuple[int, int]
    target: tuple[int, int]
    energy_source: float
    energy_target: float
    residual: float
    applications: int

    def to_json(self) -> dict:
        return {"source": list(self.source), "target": list(self.target), "energy_source": self.energy_source,
                "energy_target": self.energy_target, "residual": self.residual, "applications": self.applications}


def beta_ladder(prob: RadialProblem, n: int, lset: LadderSet | None = None) -> BetaLadderResult:
    """Sector map ``(n, l) -> (n + m1, l - m2)`` for ``beta = m2/m1``.

    In the Kepler chart the source sector has ``l~`` and the target ``l~ - m1``;
    ``m1`` raising operators ``a+_{l~-1} ... a+_{l~-m1}`` carry the closed-form
    built state ``rho_{n, l~}`` to the target sector. The result is checked as
    an eigenfunction of the target radial operator at the source energy.
    """
    m2, m1 = prob.beta.numerator, prob.beta.denominator
    l = int(prob.l)
    if l < m2:
        raise ValueError(f"sector l={l} has no partner: needs l >= {m2}")
    lt = prob.l_eff
    lset = lset or ladder_set(prob, lt - m1, lt + n + 1)
    f = excited_state(lset, n, lt)
    for j in range(1, m1 + 1):
        f = lset.raising(lt - j) @ f
    target = (n + m1, l - m2)
    e_src = energy(n, l, prob)
    e_tgt = energy(*target, prob)
    apps = n + m1
    res = eigen_residual(lset, lt - m1, f, e_src, apps)
    return BetaLadderResult((n, l), target, e_src, e_tgt, float(res), apps)
