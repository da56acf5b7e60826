"""Differentiable phase-space observables and the Poisson bracket.

Observables are plain Python callables ``fn(x, p)`` written with ordinary
arithmetic. They are evaluated on :class:`Jet` numbers, a truncated
forward-mode Taylor arithmetic carrying the value, the gradient with respect
to all ``2N`` canonical coordinates and, optionally, the Hessian. The bracket
convention is::

    {f, g} = sum_i  df/dx_i dg/dp_i - dg/dx_i df/dp_i

so that ``{x.p, p.p} = 2 p.p``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "Observable",
    "PhasePoint",
    "SingularEvaluation",
    "DimensionMismatch",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "arctan",
    "real",
    "imag",
    "conj",
    "rpow",
    "poisson_bracket",
    "bracket",
    "gradcheck",
    "coordinate",
    "momentum",
    "random_points",
]


class SingularEvaluation(ArithmeticError):
    """Raised when an observable is evaluated on (or numerically at) a singular locus."""

    def __init__(self, name: str, detail: str = ""):
        self.observable = name
        msg = f"singular evaluation of {name!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    """Positions and conjugate momenta in N Cartesian dimensions."""

    x: tuple[float, ...]
    p: tuple[float, ...]

    def __init__(self, x: Sequence[float], p: Sequence[float]):
        xs = tuple(float(v) for v in x)
        ps = tuple(float(v) for v in p)
        if len(xs) != len(ps) or not xs:
            raise DimensionMismatch(f"x has length {len(xs)}, p has length {len(ps)}")
        if not all(math.isfinite(v) for v in xs + ps):
            raise ValueError("phase point entries must be finite")
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "p", ps)

    @property
    def dim(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array(self.x + self.p)

    @classmethod
    def from_array(cls, z: Sequence[float]) -> "PhasePoint":
        z = list(z)
        n = len(z) // 2
        return cls(z[:n], z[n:])


class Jet:
    """Second-order truncated Taylor number in 2N variables.

    ``g`` is the gradient vector; ``h`` the Hessian, or ``None`` when only
    first derivatives are propagated.
    """

    __slots__ = ("v", "g", "h")

    def __init__(self, v, g, h=None):
        self.v = v
        self.g = g
        self.h = h

    # --- helpers -----------------------------------------------------------
    def _chain(self, f0, f1, f2=None):
        """Apply a scalar function with derivatives f1, f2 at self.v."""
        g = f1 * self.g
        h = None
        if self.h is not None:
            h = f1 * self.h + f2 * np.outer(self.g, self.g)
        return Jet(f0, g, h)

    @staticmethod
    def _lift(other, like: "Jet") -> "Jet":
        return Jet(other, np.zeros_like(like.g), None if like.h is None else np.zeros_like(like.h))

    # --- arithmetic --------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, Jet):
            h = None if self.h is None or o.h is None else self.h + o.h
            return Jet(self.v + o.v, self.g + o.g, h)
        return Jet(self.v + o, self.g, self.h)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.g, None if self.h is None else -self.h)

    def __pos__(self):
        return self

    def __sub__(self, o):
        if isinstance(o, Jet):
            h = None if self.h is None or o.h is None else self.h - o.h
            return Jet(self.v - o.v, self.g - o.g, h)
        return Jet(self.v - o, self.g, self.h)

    def __rsub__(self, o):
        return Jet(o - self.v, -self.g, None if self.h is None else -self.h)

    def __mul__(self, o):
        if isinstance(o, Jet):
            g = self.v * o.g + o.v * self.g
            h = None
            if self.h is not None and o.h is not None:
                cross = np.outer(self.g, o.g)
                h = self.v * o.h + o.v * self.h + cross + cross.T
            return Jet(self.v * o.v, g, h)
        return Jet(self.v * o, self.g * o, None if self.h is None else self.h * o)

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.v
        if v == 0:
            raise ZeroDivisionError("jet division by zero")
        inv = 1.0 / v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * o.reciprocal()
        return Jet(self.v / o, self.g / o, None if self.h is None else self.h / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, k):
        if isinstance(k, int):
            if k == 0:
                return Jet._lift(1.0, self)
            if k < 0:
                return (self ** (-k)).reciprocal()
            result = self
            for _ in range(k - 1):
                result = result * self
            return result
        return rpow(self, k)

    def __repr__(self):
        return f"Jet({self.v!r}, grad={self.g!r})"


# --- elementary functions, accepting Jets or plain numbers -----------------
def _is_complex(v) -> bool:
    return isinstance(v, complex) or np.iscomplexobj(v)


def sqrt(a):
    if not isinstance(a, Jet):
        return cmath.sqrt(a) if _is_complex(a) else math.sqrt(a)
    v = a.v
    if _is_complex(v):
        s = cmath.sqrt(v)
    else:
        if v <= 0:
            raise ZeroDivisionError("sqrt of non-positive jet value")
        s = math.sqrt(v)
    d1 = 0.5 / s
    return a._chain(s, d1, -0.5 * d1 / v)


def exp(a):
    if not isinstance(a, Jet):
        return cmath.exp(a) if _is_complex(a) else math.exp(a)
    e = cmath.exp(a.v) if _is_complex(a.v) else math.exp(a.v)
    return a._chain(e, e, e)


def log(a):
    if not isinstance(a, Jet):
        return cmath.log(a) if _is_complex(a) else math.log(a)
    v = a.v
    if not _is_complex(v) and v <= 0:
        raise ZeroDivisionError("log of non-positive jet value")
    lv = cmath.log(v) if _is_complex(v) else math.log(v)
    return a._chain(lv, 1.0 / v, -1.0 / (v * v))


def sin(a):
    if not isinstance(a, Jet):
        return math.sin(a)
    s, c = math.sin(a.v), math.cos(a.v)
    return a._chain(s, c, -s)


def cos(a):
    if not isinstance(a, Jet):
        return math.cos(a)
    s, c = math.sin(a.v), math.cos(a.v)
    return a._chain(c, -s, -c)


def arctan(a):
    if not isinstance(a, Jet):
        return math.atan(a)
    v = a.v
    d = 1.0 / (1.0 + v * v)
    return a._chain(math.atan(v), d, -2.0 * v * d * d)


def rpow(a, e: float):
    """``a**e`` for real exponent e and positive real ``a``, via exp(e ln a)."""
    if not isinstance(a, Jet):
        if a <= 0:
            raise ZeroDivisionError("real power of non-positive value")
        return math.exp(e * math.log(a))
    v = a.v
    if _is_complex(v) or v <= 0:
        raise ZeroDivisionError("real power of non-positive jet value")
    pv = math.exp(e * math.log(v))
    return a._chain(pv, e * pv / v, e * (e - 1.0) * pv / (v * v))


def real(a):
    if not isinstance(a, Jet):
        return a.real
    return Jet(a.v.real, a.g.real, None if a.h is None else a.h.real)


def imag(a):
    if not isinstance(a, Jet):
        return a.imag
    return Jet(a.v.imag, a.g.imag, None if a.h is None else a.h.imag)


def conj(a):
    if not isinstance(a, Jet):
        return a.conjugate()
    return Jet(a.v.conjugate(), a.g.conj(), None if a.h is None else a.h.conj())


# --- observables ------------------------------------------------------------
ObservableFn = Callable[[Sequence[Jet], Sequence[Jet]], "Jet | float | complex"]


def _seed(z: np.ndarray, order: int) -> tuple[list[Jet], list[Jet]]:
    m = z.size
    eye = np.eye(m)
    zero_h = np.zeros((m, m)) if order >= 2 else None
    jets = [Jet(float(z[i]), eye[i], zero_h) for i in range(m)]
    n = m // 2
    return jets[:n], jets[n:]


@dataclass(frozen=True)
class Observable:
    """A differentiable scalar (real or complex) function on 2N-dim phase space."""

    dim: int
    fn: ObservableFn = field(repr=False, compare=False)
    name: str = "observable"

    def jet(self, pt: PhasePoint | Sequence[float], order: int = 1) -> Jet:
        z = pt.as_array() if isinstance(pt, PhasePoint) else np.asarray(pt, dtype=float)
        if z.size != 2 * self.dim:
            raise DimensionMismatch(
                f"{self.name} has dimension {self.dim}, point has {z.size // 2}"
            )
        x, p = _seed(z, order)
        try:
            out = self.fn(x, p)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise SingularEvaluation(self.name, str(exc)) from exc
        if not isinstance(out, Jet):
            out = Jet(out, np.zeros(z.size), np.zeros((z.size, z.size)) if order >= 2 else None)
        if not (np.isfinite(out.v) and np.all(np.isfinite(out.g))):
            raise SingularEvaluation(self.name, "non-finite value or gradient")
        return out

    def value(self, pt) -> float | complex:
        return self.jet(pt).v

    def gradient(self, pt) -> np.ndarray:
        return self.jet(pt).g

    def __call__(self, pt):
        return self.value(pt)

    # --- combinators ------------------------------------------------------
    def _binary(self, other, op, sym):
        if isinstance(other, Observable):
            if other.dim != self.dim:
                raise DimensionMismatch(f"{self.name} vs {other.name}")
            f, g = self.fn, other.fn
            return Observable(self.dim, lambda x, p: op(f(x, p), g(x, p)),
                              f"({self.name} {sym} {other.name})")
        f = self.fn
        return Observable(self.dim, lambda x, p: op(f(x, p), other), f"({self.name} {sym} {other})")

    def __add__(self, o):
        return self._binary(o, lambda a, b: a + b, "+")

    def __sub__(self, o):
        return self._binary(o, lambda a, b: a - b, "-")

    def __mul__(self, o):
        return self._binary(o, lambda a, b: a * b, "*")

    def __truediv__(self, o):
        return self._binary(o, lambda a, b: a / b, "/")

    def __pow__(self, k):
        return self._binary(k, lambda a, b: a ** b, "**")

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, o):
        return (-1.0) * self + o

    def __neg__(self):
        return (-1.0) * self

    def map(self, func: Callable, name: str | None = None) -> "Observable":
        f = self.fn
        return Observable(self.dim, lambda x, p: func(f(x, p)), name or f"{func.__name__}({self.name})")

    @property
    def real(self) -> "Observable":
        return self.map(real, f"Re({self.name})")

    @property
    def imag(self) -> "Observable":
        return self.map(imag, f"Im({self.name})")

    def renamed(self, name: str) -> "Observable":
        return Observable(self.dim, self.fn, name)


def coordinate(dim: int, i: int) -> Observable:
    return Observable(dim, lambda x, p: x[i], f"x{i + 1}")


def momentum(dim: int, i: int) -> Observable:
    return Observable(dim, lambda x, p: p[i], f"p{i + 1}")


def _bracket_from_jets(fj: Jet, gj: Jet, n: int):
    fx, fp = fj.g[:n], fj.g[n:]
    gx, gp = gj.g[:n], gj.g[n:]
    return fx @ gp - gx @ fp


def poisson_bracket(f: Observable, g: Observable, pt: PhasePoint | Sequence[float]):
    """Exact Poisson bracket {f, g} at ``pt`` from analytic gradients."""
    if f.dim != g.dim:
        raise DimensionMismatch(f"{f.name} has dimension {f.dim}, {g.name} has {g.dim}")
    return _bracket_from_jets(f.jet(pt), g.jet(pt), f.dim)


def bracket(f: Observable, g: Observable) -> Observable:
    """{f, g} as an observable, with its own analytic gradient (needs Hessians of f, g)."""
    if f.dim != g.dim:
        raise DimensionMismatch(f"{f.name} has dimension {f.dim}, {g.name} has {g.dim}")
    n = f.dim
    ff, gf = f.fn, g.fn

    def fn(x, p):
        if x[0].h is None:
            # re-seed at second order; first-order callers still get a correct gradient
            seeds = np.stack([j.g for j in (*x, *p)])
            if seeds.shape != (2 * n, 2 * n) or not np.array_equal(seeds, np.eye(2 * n)):
                raise ValueError("bracket observables cannot be composed with coordinate maps")
            z = np.array([j.v for j in (*x, *p)])
            x2, p2 = _seed(z, 2)
            a, b = ff(x2, p2), gf(x2, p2)
        else:
            a, b = ff(x, p), gf(x, p)
        if a.h is None or b.h is None:
            raise ValueError("bracket of a bracket needs third derivatives")
        fx, fp = a.g[:n], a.g[n:]
        gx, gp = b.g[:n], b.g[n:]
        v = fx @ gp - gx @ fp
        grad = a.h[:, :n] @ gp + b.h[:, n:] @ fx - b.h[:, :n] @ fp - a.h[:, n:] @ gx
        return Jet(v, grad, None)

    return Observable(n, fn, f"{{{f.name}, {g.name}}}")


def gradcheck(f: Observable, pt: PhasePoint | Sequence[float], step: float = 1e-5) -> float:
    """Max over coordinates of |analytic - central difference| / (1 + |analytic|)."""
    if step <= 0:
        raise ValueError("step must be positive")
    z = pt.as_array() if isinstance(pt, PhasePoint) else np.asarray(pt, dtype=float)
    grad = f.jet(z).g
    worst = 0.0
    for i in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[i] += step
        zm[i] -= step
        fd = (f.jet(zp).v - f.jet(zm).v) / (2 * step)
        worst = max(worst, abs(grad[i] - fd) / (1.0 + abs(grad[i])))
    return float(worst)


def random_points(
    dim: int,
    count: int,
    rng: np.random.Generator,
    radius: tuple[float, float] = (0.5, 2.0),
    momentum_scale: float = 1.0,
    min_abs_coordinate: float = 0.0,
) -> list[PhasePoint]:
    """Random phase points with |x| in ``radius`` and every |x_i| >= ``min_abs_coordinate``."""
    pts: list[PhasePoint] = []
    while len(pts) < count:
        d = rng.normal(size=dim)
        d /= np.linalg.norm(d)
        x = d * rng.uniform(*radius)
        if np.min(np.abs(x)) < min_abs_coordinate:
            continue
        p = rng.normal(scale=momentum_scale, size=dim)
        pts.append(PhasePoint(x, p))
    return pts
