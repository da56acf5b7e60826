"""Constants of motion: angular momenta, the complex Runge-Lenz invariant and
its higher-order powers for rational exponents.

For the curved Kepler system the complex invariant factors as
``S = B * sqrtA / sqrt(C)`` where ``B = C u - mu + i g p_r sqrt(C)``,
``u = (1 - k r^2)/r``, ``g = 1 + k r^2`` and
``sqrtA = (x_a sqrt(C) - i (x_a J3 - p_a J-)) / sqrt(J-)`` uses a single
Cartesian site ``a``. For Perlick I with ``beta = m/n`` the same ``B`` is
written in the radially rescaled variables and ``B^n sqrtA^m`` is conserved;
Perlick II goes through the Levi-Civita/metamorphosis chain and conserves
``B^n A^m`` with ``A = sqrtA^2`` expressed through generators only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import phasespace as ps
from .coalgebra import Sl2Realization
from .phasespace import Observable, PhasePoint
from .systems import HamiltonianObservable, levi_civita_map, darboux_ccm_parts, ccm

__all__ = [
    "InvariantSet",
    "runge_lenz",
    "angular_momentum",
    "verify_commutation",
    "commutation_scan",
    "sqrt_a_fn",
    "a_from_generators_fn",
    "kepler_b_fn",
    "kepler_s_fn",
    "im_s_display",
    "im_s_scaled_display",
    "re_s_display",
    "flat_lrl",
    "ccm_invariant",
    "rotate_component",
    "jacobian_rank",
]


def angular_momentum(dim: int, i: int, j: int) -> Observable:
    return Observable(dim, lambda x, p: x[i] * p[j] - x[j] * p[i], f"L{i + 1}{j + 1}")


def sqrt_a_fn(axis: int):
    """Complex single-site factor ``(x_a sqrt(C) - i (x_a J3 - p_a J-)) / sqrt(J-)`` (Cartesian)."""

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        c = jp * jm - j3 * j3
        return (x[axis] * ps.sqrt(c) - 1j * (x[axis] * j3 - p[axis] * jm)) / ps.sqrt(jm)

    return fn


def a_from_generators_fn(real: Sl2Realization, axis: int):
    """``A = sqrtA^2`` written with the full generators and the one-site triple at ``axis``.

    Valid for any realization; for the Cartesian one it equals ``sqrt_a_fn(axis)**2``.
    """

    def fn(x, p):
        jm, jp, j3 = real.generators(x, p)
        c = jp * jm - j3 * j3
        m1, p1, t1 = real.site(x, p, axis)
        re = m1 * c - m1 * j3 * j3 + 2.0 * t1 * j3 * jm - p1 * jm * jm
        im = -2.0 * ps.sqrt(c) * (m1 * j3 - t1 * jm)
        return (re + 1j * im) / jm

    return fn


def _gens(x, p):
    jm = x[0] * x[0]
    jp = p[0] * p[0]
    j3 = x[0] * p[0]
    for i in range(1, len(x)):
        jm = jm + x[i] * x[i]
        jp = jp + p[i] * p[i]
        j3 = j3 + x[i] * p[i]
    return jm, jp, j3


def kepler_b_fn(k: float, mu, real: Sl2Realization | None = None):
    """``B = C (1 - k r^2)/r - mu + i (1 + k r^2)(J3/r) sqrt(C)``; ``mu`` may be a callable."""

    def fn(x, p):
        jm, jp, j3 = real.generators(x, p) if real is not None else _gens(x, p)
        c = jp * jm - j3 * j3
        r = ps.sqrt(jm)
        m = mu(x, p) if callable(mu) else mu
        return c * (1.0 - k * jm) / r - m + 1j * (1.0 + k * jm) * (j3 / r) * ps.sqrt(c)

    return fn


def kepler_s_fn(k: float, mu, axis: int = 0):
    """Complex Runge-Lenz invariant ``S = B sqrtA / sqrt(C)`` of the curved Kepler system."""
    b, a = kepler_b_fn(k, mu), sqrt_a_fn(axis)

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        return b(x, p) * a(x, p) / ps.sqrt(jp * jm - j3 * j3)

    return fn


def re_s_display(k: float, mu: float, axis: int = 0):
    """Real part written out in generators (first-component Runge-Lenz form)."""

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        c = jp * jm - j3 * j3
        xa, pa = x[axis], p[axis]
        return (c * (1.0 - k * jm) * xa / jm
                + (1.0 + k * jm) * (xa * j3 - pa * jm) * j3 / jm
                - mu * xa / ps.sqrt(jm))

    return fn


def expanded_lrl(k: float, mu: float, axis: int = 0):
    """``(1 - k x^2) p^2 x_a + 2k (x.p)^2 x_a - (1 + k x^2)(x.p) p_a - mu x_a/|x|``."""

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        xa, pa = x[axis], p[axis]
        return ((1.0 - k * jm) * jp * xa + 2.0 * k * j3 * j3 * xa
                - (1.0 + k * jm) * j3 * pa - mu * xa / ps.sqrt(jm))

    return fn


def flat_lrl(mu: float, axis: int = 0):
    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        return jp * x[axis] - j3 * p[axis] - mu * x[axis] / ps.sqrt(jm)

    return fn


def im_s_display(k: float, mu: float, axis: int = 0):
    """Imaginary part as ``(1/sqrt(C)) * [ ... ]``."""
    inner = im_s_scaled_display(k, mu, axis)

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        return inner(x, p) / ps.sqrt(jp * jm - j3 * j3)

    return fn


def im_s_scaled_display(k: float, mu: float, axis: int = 0):
    """``sqrt(C) Im S``, polynomial in the momenta."""

    def fn(x, p):
        jm, jp, j3 = _gens(x, p)
        c = jp * jm - j3 * j3
        xa, pa = x[axis], p[axis]
        return (c * (1.0 + k * jm) * j3 * xa / jm
                - (c * (1.0 - k * jm) / jm - mu / ps.sqrt(jm)) * (xa * j3 - pa * jm))

    return fn


def _int_power(z, n: int):
    out = z
    for _ in range(n - 1):
        out = out * z
    return out


def _perlick_one_b_fn(real: Sl2Realization, beta: float, k: float, mu: float):
    """B in the radially rescaled variables ``R = r^beta``, ``P = J3 r^-beta / beta``."""
    mu_k = mu / (beta * beta)

    def fn(x, p):
        jm, jp, j3 = real.generators(x, p)
        c = jp * jm - j3 * j3
        R = ps.rpow(jm, 0.5 * beta)
        P = j3 / (R * beta)
        R2 = R * R
        return ((c / (beta * beta)) * (1.0 - k * R2) / R - mu_k
                + 1j * (1.0 + k * R2) * P * ps.sqrt(c) / beta)

    return fn


def _perlick_two_b_fn(real: Sl2Realization, gamma: float, lam: float, H: Observable):
    """Kepler B after undoing the radial rescale, metamorphosis and Levi-Civita map.

    ``r_K = R^2/2``, ``p_rK = P/R``, ``L_K = sqrt(C)/(2 gamma)``,
    ``k_K = -4 lam^2``, ``mu_K = H/(2 gamma^2)``.
    """
    k_k = -4.0 * lam * lam
    hfn = H.fn

    def fn(x, p):
        jm, jp, j3 = real.generators(x, p)
        c = jp * jm - j3 * j3
        R = ps.rpow(jm, 0.5 * gamma)
        P = j3 / (R * gamma)
        rk = 0.5 * R * R
        prk = P / R
        lk = ps.sqrt(c) / (2.0 * gamma)
        mu_k = hfn(x, p) / (2.0 * gamma * gamma)
        return lk * lk * (1.0 - k_k * rk * rk) / rk - mu_k + 1j * (1.0 + k_k * rk * rk) * prk * lk

    return fn


@dataclass
class InvariantSet:
    system: HamiltonianObservable
    axis: int
    angular: dict[tuple[int, int], Observable]
    B: Observable
    A: Observable
    higher: Observable
    sqrtA: Observable | None = None
    S: Observable | None = None
    exponents: tuple[int, int] = (1, 1)
    notes: list[str] = field(default_factory=list)

    @property
    def higher_re(self) -> Observable:
        return self.higher.real.renamed("Re S_higher")

    @property
    def higher_im(self) -> Observable:
        return self.higher.imag.renamed("Im S_higher")

    def registered(self) -> dict[str, Observable]:
        """Real observables to log along trajectories."""
        out = {"H": self.system.H}
        for (i, j), obs in self.angular.items():
            out[obs.name] = obs
        out["Re_S"] = self.higher_re
        out["Im_S"] = self.higher_im
        return out


def runge_lenz(system: HamiltonianObservable, axis: int = 0) -> InvariantSet:
    """Complex Runge-Lenz style invariants for a built system.

    ``higher`` is the polynomial invariant: ``B sqrtA`` (Kepler),
    ``B^n sqrtA^m`` (Perlick I, ``beta = m/n``), ``B^n A^m`` (Perlick II and
    the metamorphosed Darboux system, ``gamma = m/n``), and the
    representation-independent ``B^(2n) A^m`` for the TTW system.
    """
    spec = system.spec
    if spec is None:
        raise ValueError("runge_lenz needs a system built from a SystemSpec")
    N = system.dim
    if not 0 <= axis < N:
        raise ValueError(f"axis {axis} out of range for dimension {N}")
    real = system.realization
    if real.singular_coordinates:
        # no rotational symmetry; the centrifugal Casimir replaces L^2
        angular = {(0, N - 1): real.casimir().renamed("C")}
    else:
        angular = {(i, j): angular_momentum(N, i, j) for i in range(N) for j in range(i + 1, N)}
    A = Observable(N, a_from_generators_fn(real, axis), "A")
    sqrtA = None if real.singular_coordinates else Observable(N, sqrt_a_fn(axis), "sqrtA")
    fam = spec.family
    S = None
    if fam == "KeplerCurved":
        bfn = kepler_b_fn(spec.k, spec.mu, real)
        m = n = 1
        S = Observable(N, kepler_s_fn(spec.k, spec.mu, axis), "S")
    elif fam in ("PerlickI", "TTWCurved"):
        beta = spec.beta
        bfn = _perlick_one_b_fn(real, float(beta), spec.k, spec.mu)
        m, n = beta.numerator, beta.denominator
        if beta == 1 and fam == "PerlickI":
            S = Observable(N, kepler_s_fn(spec.k, spec.mu, axis), "S")
    else:
        gamma = spec.gamma if fam == "PerlickII" else Fraction(1)
        bfn = _perlick_two_b_fn(real, float(gamma), spec.lam, system.H)
        m, n = gamma.numerator, gamma.denominator
    B = Observable(N, bfn, "B")
    afn = A.fn
    if fam in ("KeplerCurved", "PerlickI"):
        sfn = sqrtA.fn
        higher = Observable(N, lambda x, p: _int_power(bfn(x, p), n) * _int_power(sfn(x, p), m), "S_higher")
    elif fam == "TTWCurved":
        higher = Observable(N, lambda x, p: _int_power(bfn(x, p), 2 * n) * _int_power(afn(x, p), m), "S_higher")
    else:
        higher = Observable(N, lambda x, p: _int_power(bfn(x, p), n) * _int_power(afn(x, p), m), "S_higher")
    return InvariantSet(system, axis, angular, B, A, higher, sqrtA, S, (m, n))


def rotate_component(component: Observable, axis_from: int, axis_to: int) -> Observable:
    """Runge-Lenz component along ``axis_to`` from the one along ``axis_from`` via ``{a, L}``."""
    L = angular_momentum(component.dim, axis_to, axis_from)
    return ps.bracket(component, L).renamed(f"{component.name}[{axis_to + 1}]")


def ccm_invariant(lam: float, delta: float, E: float) -> tuple[Observable, Observable]:
    """The metamorphosed Darboux Hamiltonian and the Kepler ``S`` pulled back to it.

    ``S~(x, p) = S_Kepler(LC(x, p); k = -4 lam^2, mu = H~(x, p)/2)``.
    """
    T, U = darboux_ccm_parts(lam * lam, delta)
    Ht = ccm(T, 0.0, U, -E)
    k_k = -4.0 * lam * lam
    hfn = Ht.fn

    def mu_of(xt, pt):
        return hfn(xt, pt) * 0.5

    def fn(xt, pt):
        X, P = levi_civita_map(xt, pt)
        mu = mu_of(xt, pt)
        return kepler_s_fn(k_k, lambda *_: mu)(X, P)

    return Ht, Observable(2, fn, "S_ccm")


def commutation_scan(system: HamiltonianObservable, invariant: Observable, num_points: int = 50,
                     seed: int = 0, radius: tuple[float, float] = (0.5, 2.0),
                     relative: bool = False) -> tuple[float, PhasePoint | None]:
    """Worst |{H, I}| over random admissible points, and where it occurs.

    With ``relative`` each bracket is divided by
    ``|d_x H| |d_p I| + |d_p H| |d_x I|``, which makes the measure independent
    of the invariant's overall scale (useful for high powers).
    """
    rng = np.random.default_rng(seed)
    n = system.dim
    worst, where = 0.0, None
    got = 0
    floor = 0.1 if system.realization.singular_coordinates else 0.0
    while got < num_points:
        (pt,) = ps.random_points(n, 1, rng, radius=radius, min_abs_coordinate=floor)
        if system.singular_distance(pt.as_array()) < 0.05:
            continue
        try:
            gh = system.H.jet(pt).g
            gi = invariant.jet(pt).g
        except ps.SingularEvaluation:
            continue
        val = abs(gh[:n] @ gi[n:] - gh[n:] @ gi[:n])
        if relative:
            scale = (np.linalg.norm(gh[:n]) * np.linalg.norm(gi[n:])
                     + np.linalg.norm(gh[n:]) * np.linalg.norm(gi[:n]))
            val = val / scale if scale > 0 else val
        if val >= worst:
            worst, where = float(val), pt
        got += 1
    return worst, where


def verify_commutation(system: HamiltonianObservable, invariant: Observable, num_points: int = 50,
                       seed: int = 0, radius: tuple[float, float] = (0.5, 2.0)) -> float:
    """Max |{H, I}| over random admissible points."""
    return commutation_scan(system, invariant, num_points, seed, radius)[0]


def jacobian_rank(observables: list[Observable], pt: PhasePoint, rel_threshold: float = 1e-8) -> int:
    """Numerical rank of the gradient matrix of ``observables`` at ``pt``."""
    jac = np.array([np.real_if_close(o.gradient(pt)) for o in observables], dtype=float)
    sv = np.linalg.svd(jac, compute_uv=False)
    return int(np.sum(sv > rel_threshold * sv[0]))
