"""Hamiltonian families and the structural transforms that relate them.

Every Hamiltonian is a Cartesian-coordinate :class:`Observable` assembled
from sl(2) generators, with ``r = sqrt(J-)``. Rational exponents are exact
:class:`fractions.Fraction` values; real powers go through ``exp(e ln r)``,
so the domain is ``r > 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import phasespace as ps
from .coalgebra import Sl2Realization, realize
from .phasespace import Observable, PhasePoint

__all__ = [
    "FAMILIES",
    "SystemSpec",
    "HamiltonianObservable",
    "SpecError",
    "parse_rational",
    "format_rational",
    "build",
    "kepler_curved_fn",
    "perlick_one_fn",
    "perlick_two_fn",
    "darboux_pre_ccm",
    "ccm",
    "AngularRescale",
    "angular_rescale",
    "levi_civita",
    "levi_civita_map",
    "polar_to_cartesian",
    "cartesian_to_polar",
]

FAMILIES = ("KeplerCurved", "PerlickI", "PerlickII", "DarbouxCCM", "TTWCurved")


class SpecError(ValueError):
    """Inadmissible system parameters or malformed JSON."""


def parse_rational(value) -> Fraction:
    """Parse ``"m/n"`` (or an int) into a positive Fraction, rejecting non-lowest terms."""
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, int) and not isinstance(value, bool):
        frac = Fraction(value)
    elif isinstance(value, str):
        text = value.strip()
        if "/" in text:
            m_s, n_s = text.split("/", 1)
            try:
                m, n = int(m_s), int(n_s)
            except ValueError as exc:
                raise SpecError(f"not a rational: {value!r}") from exc
            if n <= 0 or m <= 0:
                raise SpecError(f"rational must be positive: {value!r}")
            if math.gcd(m, n) != 1:
                raise SpecError(f"rational {value!r} is not in lowest terms")
            frac = Fraction(m, n)
        else:
            try:
                frac = Fraction(int(text))
            except ValueError as exc:
                raise SpecError(f"not a rational: {value!r}") from exc
    else:
        raise SpecError(f"rationals must be given as 'm/n' strings, got {value!r}")
    if frac <= 0:
        raise SpecError(f"rational must be positive: {value!r}")
    return frac


def format_rational(frac: Fraction) -> str:
    return f"{frac.numerator}/{frac.denominator}"


@dataclass(frozen=True)
class SystemSpec:
    family: str
    dim: int = 2
    k: float = 0.0
    lam: float = 0.0
    delta: float = 0.0
    mu: float = 1.0
    beta: Fraction = Fraction(1)
    gamma: Fraction = Fraction(1)
    b1: float = 0.0
    b2: float = 0.0
    E: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "beta", parse_rational(self.beta))
        object.__setattr__(self, "gamma", parse_rational(self.gamma))
        if self.dim < 2:
            raise SpecError("dimension must be >= 2")
        if self.mu <= 0:
            raise SpecError("mu must be positive")
        if self.lam < 0:
            raise SpecError("lambda must be non-negative")
        if self.family == "TTWCurved":
            if self.dim != 2:
                raise SpecError("TTWCurved is two-dimensional")
            if self.b1 < 0 or self.b2 < 0:
                raise SpecError("b1, b2 must be non-negative")

    def to_json(self) -> dict:
        out = {"family": self.family, "dim": self.dim}
        for f in fields(self):
            if f.name in ("family", "dim"):
                continue
            val = getattr(self, f.name)
            out[f.name] = format_rational(val) if isinstance(val, Fraction) else val
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "SystemSpec":
        if not isinstance(data, dict) or "family" not in data:
            raise SpecError("system spec must be an object with a 'family' key")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown system fields: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("beta", "gamma"):
            if key in kwargs:
                kwargs[key] = parse_rational(kwargs[key])
        for key in ("k", "lam", "delta", "mu", "b1", "b2", "E"):
            if key in kwargs and not isinstance(kwargs[key], (int, float)):
                raise SpecError(f"{key} must be a number")
        return cls(**kwargs)

    def with_(self, **changes) -> "SystemSpec":
        return replace(self, **changes)


# --- Hamiltonian expressions ------------------------------------------------
def kepler_curved_fn(real: Sl2Realization, k: float, mu, delta: float = 0.0, beta: float = 1.0):
    """Curved Kepler in coalgebra form.

    ``H = (1 + k J-)^2/2 (J3^2/J- + C/(beta^2 J-)) - mu (1 - k J-)/sqrt(J-) + 4 mu delta``;
    ``beta = 1`` is the constant-curvature Kepler problem with kinetic term ``(1+kr^2)^2 p^2 / 2``.
    ``mu`` may itself be a jet-valued callable of (x, p).
    """

    def fn(x, p):
        jm, jp, j3 = real.generators(x, p)
        r = ps.sqrt(jm)
        g = 1.0 + k * jm
        if beta == 1.0:
            kin = 0.5 * g * g * jp
        else:
            cas = jp * jm - j3 * j3
            kin = 0.5 * g * g * (j3 * j3 + cas / (beta * beta)) / jm
        m = mu(x, p) if callable(mu) else mu
        return kin - m * (1.0 - k * jm) / r + 4.0 * m * delta

    return fn


def perlick_one_fn(real: Sl2Realization, beta: float, k: float, mu: float):
    """``H = r^2 (r^-b + k r^b)^2 / 2 * J+ - mu (r^-b - k r^b)``; ``beta`` may be any positive float."""
    half = 0.5 * float(beta)

    def fn(x, p):
        jm, jp, _ = real.generators(x, p)
        rb = ps.rpow(jm, half)  # r^beta
        q = 1.0 / rb + k * rb
        return 0.5 * jm * q * q * jp - mu * (1.0 / rb - k * rb)

    return fn


def perlick_two_fn(real: Sl2Realization, gamma: float, lam: float, delta: float, mu: float):
    """``H = r^2 (s^-1 - l^2 s)^2 / (2U) J+ + mu/U``, ``s = r^(2 gamma)``, ``U = s^-1 + l^2 s - 2 delta``."""
    lam2 = lam * lam

    def fn(x, p):
        jm, jp, _ = real.generators(x, p)
        s = ps.rpow(jm, float(gamma))
        u = 1.0 / s + lam2 * s - 2.0 * delta
        if u.v <= 0:
            raise ValueError("outside the admissible annulus (U <= 0)")
        w = 1.0 / s - lam2 * s
        return 0.5 * jm * w * w * jp / u + mu / u

    return fn


def _darboux_parts(lam2: float, delta: float):
    """Kinetic term and U of the Levi-Civita-transformed curved Kepler system (J- = r^2)."""

    def kinetic(x, p):
        jm, jp, _ = _cart2(x, p)
        w = 1.0 / jm - lam2 * jm
        return 0.5 * w * w * jm * jp

    def potential_u(x, p):
        jm = _cart2(x, p)[0]
        return 1.0 / jm + lam2 * jm - 2.0 * delta

    return kinetic, potential_u


def _cart2(x, p):
    jm = x[0] * x[0]
    jp = p[0] * p[0]
    j3 = x[0] * p[0]
    for i in range(1, len(x)):
        jm = jm + x[i] * x[i]
        jp = jp + p[i] * p[i]
        j3 = j3 + x[i] * p[i]
    return jm, jp, j3


def darboux_pre_ccm(lam2: float, delta: float, mu_tilde: float, dim: int = 2) -> Observable:
    """``H = (r^-2 - l^2 r^2)^2 r^2/2 p^2 - mu~ (r^-2 + l^2 r^2 - 2 delta)`` with ``lam2 = l^2`` (may be negative)."""
    kin, u = _darboux_parts(lam2, delta)
    return Observable(dim, lambda x, p: kin(x, p) - mu_tilde * u(x, p), "H_darboux_pre_ccm")


def ccm(T: Observable, V: Observable | float, U: Observable, E: float) -> Observable:
    """Coupling-constant metamorphosis ``H~ = (T + V - E) / U``."""
    vf = V.fn if isinstance(V, Observable) else (lambda x, p, _v=float(V): _v)
    tf, uf = T.fn, U.fn

    def fn(x, p):
        uv = uf(x, p)
        val = uv.v if isinstance(uv, ps.Jet) else uv
        if val == 0:
            raise ZeroDivisionError("U vanishes")
        return (tf(x, p) + vf(x, p) - E) / uv

    return Observable(T.dim, fn, f"ccm({T.name})")


def darboux_ccm_parts(lam2: float, delta: float, dim: int = 2) -> tuple[Observable, Observable]:
    kin, u = _darboux_parts(lam2, delta)
    return Observable(dim, kin, "T_darboux"), Observable(dim, u, "U_darboux")


# --- built systems ------------------------------------------------------------
@dataclass(frozen=True)
class HamiltonianObservable:
    spec: SystemSpec | None
    H: Observable
    realization: Sl2Realization
    singular_radii: tuple[float, ...] = ()
    radial: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return self.H.dim

    def singular_distance(self, z: Sequence[float]) -> float:
        """Distance from the configuration part of ``z`` to the nearest singular locus."""
        n = self.dim
        x = np.asarray(z[:n], dtype=float)
        r = float(np.linalg.norm(x))
        d = r
        for rs in self.singular_radii:
            d = min(d, abs(r - rs))
        for i in self.realization.singular_coordinates:
            d = min(d, abs(x[i]))
        return d

    def __call__(self, pt):
        return self.H(pt)


def _perlick_two_singular_radii(gamma: Fraction, lam: float, delta: float) -> tuple[float, ...]:
    """Radii where U = s^-1 + lam^2 s - 2 delta or the kinetic factor vanishes (s = r^(2 gamma))."""
    lam2 = lam * lam
    svals = []
    if lam2 > 0:
        disc = delta * delta - lam2
        if disc >= 0:
            for sgn in (-1.0, 1.0):
                s = (delta + sgn * math.sqrt(disc)) / lam2
                if s > 0:
                    svals.append(s)
        svals.append(1.0 / lam)
    elif delta > 0:
        svals.append(1.0 / (2.0 * delta))
    return tuple(sorted(s ** (1.0 / (2.0 * float(gamma))) for s in svals))


def build(spec: SystemSpec) -> HamiltonianObservable:
    """Cartesian Hamiltonian observable for a system spec."""
    N = spec.dim
    cart = realize(N)
    fam = spec.family
    if fam == "KeplerCurved":
        fn = kepler_curved_fn(cart, spec.k, spec.mu, spec.delta)
        radii = (1.0 / math.sqrt(-spec.k),) if spec.k < 0 else ()
        return HamiltonianObservable(spec, Observable(N, fn, "H_KeplerCurved"), cart, radii)
    if fam == "PerlickI":
        fn = perlick_one_fn(cart, float(spec.beta), spec.k, spec.mu)
        radii = ((-1.0 / spec.k) ** (0.5 / float(spec.beta)),) if spec.k < 0 else ()
        return HamiltonianObservable(spec, Observable(N, fn, "H_PerlickI"), cart, radii)
    if fam == "PerlickII":
        fn = perlick_two_fn(cart, float(spec.gamma), spec.lam, spec.delta, spec.mu)
        radii = _perlick_two_singular_radii(spec.gamma, spec.lam, spec.delta)
        return HamiltonianObservable(spec, Observable(N, fn, "H_PerlickII"), cart, radii)
    if fam == "DarbouxCCM":
        T, U = darboux_ccm_parts(spec.lam ** 2, spec.delta, N)
        # the CCM energy enters as -E so that E is the coefficient of +1/U
        H = ccm(T, 0.0, U, -spec.E).renamed("H_DarbouxCCM")
        radii = _perlick_two_singular_radii(Fraction(1), spec.lam, spec.delta)
        return HamiltonianObservable(spec, H, cart, radii)
    # TTWCurved: Perlick I with the centrifugal realization swapped in
    cent = realize(2, "centrifugal", (spec.b1, spec.b2))
    fn = perlick_one_fn(cent, float(spec.beta), spec.k, spec.mu)
    return HamiltonianObservable(spec, Observable(2, fn, "H_TTWCurved"), cent, (), radial=False)


# --- coordinate maps --------------------------------------------------------
def polar_to_cartesian(r, theta, pr, ptheta):
    """2D polar canonical chart to Cartesian (x, p); works on floats or jets."""
    c, s = ps.cos(theta), ps.sin(theta)
    return (r * c, r * s), (c * pr - s * ptheta / r, s * pr + c * ptheta / r)


def cartesian_to_polar(x, p):
    x1, x2 = x
    p1, p2 = p
    r = math.hypot(x1, x2)
    theta = math.atan2(x2, x1)
    return r, theta, (x1 * p1 + x2 * p2) / r, x1 * p2 - x2 * p1


@dataclass(frozen=True)
class AngularRescale:
    """Canonical map between the Perlick-I polar chart and the curved-Kepler polar chart.

    Kepler -> Perlick: ``r = r'^(1/b)``, ``p_r = b r'^(1-1/b) p_r'``,
    ``theta = theta'/b``, ``p_theta = b p_theta'``. Under it
    ``H_PerlickI(beta, k, mu) = beta^2 H_Kepler(k, mu/beta^2, delta=0)``.
    """

    beta: Fraction

    def to_perlick(self, r, theta, pr, ptheta):
        b = float(self.beta)
        if not isinstance(r, ps.Jet) and r <= 0:
            raise ValueError("radius must be positive")
        return (
            ps.rpow(r, 1.0 / b),
            theta / b,
            b * ps.rpow(r, 1.0 - 1.0 / b) * pr,
            b * ptheta,
        )

    def to_kepler(self, r, theta, pr, ptheta):
        b = float(self.beta)
        if not isinstance(r, ps.Jet) and r <= 0:
            raise ValueError("radius must be positive")
        return (
            ps.rpow(r, b),
            theta * b,
            ps.rpow(r, 1.0 - b) * pr / b,
            ptheta / b,
        )


def angular_rescale(spec_or_beta) -> AngularRescale:
    beta = spec_or_beta.beta if isinstance(spec_or_beta, SystemSpec) else parse_rational(spec_or_beta)
    return AngularRescale(beta)


def levi_civita_map(x, p):
    """Levi-Civita map with its induced cotangent lift; works on floats or jets.

    ``X = (u^2 - v^2)/2``, ``Y = u v``; momenta ``P = J^-T p`` with
    ``J = [[u, -v], [v, u]]`` and ``det J = u^2 + v^2``.
    """
    u, v = x
    pu, pv = p
    det = u * u + v * v
    X = (u * u - v * v) * 0.5
    Y = u * v
    PX = (u * pu - v * pv) / det
    PY = (v * pu + u * pv) / det
    return (X, Y), (PX, PY)


def levi_civita(pt: PhasePoint) -> PhasePoint:
    if pt.dim != 2:
        raise ps.DimensionMismatch("Levi-Civita map is two-dimensional")
    if pt.x[0] == 0.0 and pt.x[1] == 0.0:
        raise ps.SingularEvaluation("levi_civita", "origin")
    X, P = levi_civita_map(pt.x, pt.p)
    return PhasePoint(X, P)
