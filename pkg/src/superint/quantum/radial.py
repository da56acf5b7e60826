"""Radial quantum problem of the curved Kepler / Perlick I family.

All grid work happens in the two-dimensional Kepler chart, where the radial
operator is

    H_l = -hbar^2 (1 + k r^2)^2 / 2 (d_r^2 + d_r / r - l^2 / r^2) - mu (1 - k r^2) / r

with ``l`` replaced by ``l~ = (l + (N-2)/2) / beta`` for the N-dimensional
Perlick I problem. On the grid t = ln r, multiplying by ``w = r^2 / (1+kr^2)^2``
gives the symmetric pencil ``A rho = E W rho``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from ..systems import format_rational, parse_rational
from .grid import Boundary, LogGrid

__all__ = [
    "RadialProblem",
    "energy",
    "kepler_energy",
    "is_bound",
    "make_grid",
    "RadialOperators",
    "operators",
    "SpectrumTable",
    "eigensolve",
    "RadialWavefunction",
    "GridResolutionError",
    "DEFAULT_STEP",
]

DEFAULT_STEP = 0.01


class GridResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class RadialProblem:
    """Radial sector ``l`` of the N-dimensional problem.

    ``l`` is a non-negative integer, except for the two-dimensional
    ``beta = 1`` representative returned by :func:`reduce`, where it may be
    any non-negative rational.
    """

    k: float = 0.0
    mu: float = 1.0
    beta: Fraction = Fraction(1)
    hbar: float = 1.0
    dim: int = 2
    l: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "beta", parse_rational(self.beta))
        object.__setattr__(self, "l", Fraction(self.l))
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")
        if self.hbar <= 0 or self.mu <= 0:
            raise ValueError("hbar and mu must be positive")
        if self.k < 0:
            raise ValueError("k < 0 has no bound-state analysis here")
        if self.l < 0:
            raise ValueError("l must be non-negative")
        if self.l.denominator != 1 and not (self.dim == 2 and self.beta == 1):
            raise ValueError("l must be an integer")

    @property
    def l_tilde(self) -> Fraction:
        return (self.l + Fraction(self.dim - 2, 2)) / self.beta

    @property
    def l_eff(self) -> float:
        return float(self.l_tilde)

    def with_l(self, l) -> "RadialProblem":
        return RadialProblem(self.k, self.mu, self.beta, self.hbar, self.dim, Fraction(l))

    def to_json(self) -> dict:
        return {"k": self.k, "mu": self.mu, "beta": format_rational(self.beta), "hbar": self.hbar,
                "dim": self.dim, "l": format_rational(self.l) if self.l.denominator != 1 else int(self.l),
                "l_tilde": format_rational(self.l_tilde)}


def kepler_energy(nu, k: float, mu: float, hbar: float) -> float:
    """``-mu^2 / (2 hbar^2 nu^2) + 2 k hbar^2 nu^2 - k hbar^2 / 2``."""
    nu = float(nu)
    return -mu * mu / (2 * hbar * hbar * nu * nu) + 2 * k * hbar * hbar * nu * nu - k * hbar * hbar / 2


def principal(n: int, prob: RadialProblem) -> Fraction:
    return prob.l_tilde + n + Fraction(1, 2)


def energy(n: int, l, prob: RadialProblem) -> float:
    """Closed-form level ``E_{n,l}`` of the problem's family, dimension and beta."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return kepler_energy(principal(n, prob.with_l(l)), prob.k, prob.mu, prob.hbar)


def is_bound(n: int, l, prob: RadialProblem) -> bool:
    """k > 0 confines every level; for k = 0 only negative energies are bound."""
    return prob.k > 0 or energy(n, l, prob) < 0


# --- grids and operators -------------------------------------------------------
def _edge_extent(lt: float) -> float:
    # rho ~ exp(-l~ |t|) near a power-law end; go until that is ~1e-13
    return max(35.0, 30.0 / lt) if lt > 0 else 35.0


def make_grid(prob: RadialProblem, nu_max: float, h: float = DEFAULT_STEP, lt_min: float | None = None) -> LogGrid:
    """t-grid resolving states with principal number up to ``nu_max``.

    The left end sits where ``r^l~`` has decayed; the right end likewise for
    k > 0 (mirror behaviour past ``r = 1/sqrt(k)``) and past the exponential
    tail ``exp(-mu r / (hbar^2 nu))`` for k = 0.
    """
    lt = prob.l_eff if lt_min is None else lt_min
    t_left = -_edge_extent(lt)
    if prob.k > 0:
        t_right = -0.5 * math.log(prob.k) + _edge_extent(lt)
    else:
        r_max = prob.hbar**2 * nu_max * (2.0 * nu_max + 40.0) / prob.mu
        t_right = math.log(r_max)
    return LogGrid.spanning(t_left, t_right, h)


def _boundaries(prob: RadialProblem, lt: float) -> tuple[Boundary, Boundary]:
    left = Boundary.neumann() if lt == 0 else Boundary.dirichlet()
    if prob.k > 0:
        right = Boundary.neumann() if lt == 0 else Boundary.dirichlet()
    else:
        right = Boundary.dirichlet()
    return left, right


@dataclass
class RadialOperators:
    """Grid matrices for one sector; ``H = diag(1/w) A``."""

    prob: RadialProblem
    grid: LogGrid
    lt: float
    A: sp.csr_matrix
    W: sp.dia_matrix
    w: np.ndarray
    V: np.ndarray
    g: np.ndarray
    D1: sp.csr_matrix
    D2: sp.csr_matrix

    @property
    def H(self) -> sp.csr_matrix:
        return sp.diags(1.0 / self.w) @ self.A

    def apply_H(self, rho: np.ndarray) -> np.ndarray:
        return (self.A @ rho) / self.w

    def norm(self, rho: np.ndarray) -> float:
        """L2 norm in the curved measure ``r dr / (1 + k r^2)^2`` (``w dt`` on the grid)."""
        return math.sqrt(self.grid.integrate(self.w * np.abs(rho) ** 2))


def operators(prob: RadialProblem, grid: LogGrid, lt: float | None = None,
              boundaries: tuple[Boundary, Boundary] | None = None) -> RadialOperators:
    lt = prob.l_eff if lt is None else float(lt)
    r = grid.r
    g = 1.0 + prob.k * r * r
    w = (r / g) ** 2
    V = -prob.mu * (1.0 - prob.k * r * r) / r
    left, right = boundaries or _boundaries(prob, lt)
    D1 = grid.D1(left, right)
    D2 = grid.D2(left, right)
    hb2 = prob.hbar**2
    A = (-0.5 * hb2) * D2 + sp.diags(0.5 * hb2 * lt * lt + w * V)
    return RadialOperators(prob, grid, lt, A.tocsr(), sp.diags(w), w, V, g, D1, D2)


def check_resolution(ops: RadialOperators, E: float, per_wavelength: int = 12) -> float:
    """Smallest number of nodes per local wavelength in the allowed region; raises if below the floor."""
    p2 = 2.0 * ops.w * (E - ops.V) / ops.prob.hbar**2 - ops.lt**2
    pmax = math.sqrt(max(float(p2.max()), 0.0))
    if pmax == 0.0:
        return math.inf
    nodes = 2 * math.pi / (pmax * ops.grid.h)
    if nodes < per_wavelength:
        raise GridResolutionError(
            f"grid step {ops.grid.h:.3g} gives {nodes:.1f} nodes per wavelength at E={E:.6g}; "
            f"need >= {per_wavelength}"
        )
    return nodes


# --- spectrum ---------------------------------------------------------------------
@dataclass
class SpectrumRow:
    n: int
    l: Fraction
    E_formula: float
    E_grid: float | None
    residual: float | None

    def as_list(self):
        return [self.n, _fmt_l(self.l), self.E_formula, self.E_grid, self.residual]


def _fmt_l(l: Fraction):
    return int(l) if l.denominator == 1 else format_rational(l)


@dataclass
class SpectrumTable:
    problem: RadialProblem
    rows: list[SpectrumRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        vals = [r.residual for r in self.rows if r.residual is not None]
        return max(vals) if vals else math.inf

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_json(),
            "columns": ["n", "l", "E_formula", "E_grid", "residual"],
            "rows": [r.as_list() for r in self.rows],
            "max_residual": self.max_residual,
            "notes": self.notes,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "l", "E_formula", "E_grid", "residual"])
        for r in self.rows:
            wr.writerow([r.n, _fmt_l(r.l), _g17(r.E_formula), _g17(r.E_grid), _g17(r.residual)])
        return buf.getvalue()

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _g17(v):
    return "" if v is None else format(v, ".17g")


def _shift(ops: RadialOperators) -> float:
    # lower bound: the effective potential minimum, capped by the flat
    # two-dimensional Coulomb ground state -2 mu^2 / hbar^2 (curvature and
    # centrifugal terms only raise levels)
    p = ops.prob
    veff = ops.V + 0.5 * p.hbar**2 * ops.lt**2 / ops.w
    floor = max(float(veff.min()), -2.0 * p.mu**2 / p.hbar**2)
    return floor - 0.25 * abs(floor) - 1e-3


def shift_invert_lowest(A, w: np.ndarray, sigma: float, count: int):
    """Lowest eigenpairs of ``A x = E diag(w) x`` just above ``sigma``.

    Iterates on the symmetric operator ``W^1/2 (A - sigma W)^-1 W^1/2`` whose
    largest eigenvalues are ``1 / (E - sigma)``.
    """
    sw = np.sqrt(w)
    lu = splu((A - sigma * sp.diags(w)).tocsc())
    n = A.shape[0]
    op = LinearOperator((n, n), matvec=lambda v: sw * lu.solve(sw * np.ravel(v)), dtype=float)
    theta, y = eigsh(op, k=count, which="LA", tol=1e-13, v0=sw / np.linalg.norm(sw))
    vals = sigma + 1.0 / theta
    vecs = y / sw[:, None]
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def eigensolve(prob: RadialProblem, count: int, h: float = DEFAULT_STEP,
               return_vectors: bool = False):
    """Lowest ``count`` grid eigenvalues of the sector, paired with the closed form.

    The closed form is used only for pairing and for the resolution check;
    the eigenvalues come from shift-invert iteration below the spectrum.
    """
    if count < 1:
        raise ValueError("count must be positive")
    lt = prob.l_eff
    nu_max = lt + count - 0.5
    grid = make_grid(prob, nu_max, h)
    ops = operators(prob, grid)
    table = SpectrumTable(prob)
    check_resolution(ops, energy(count - 1, prob.l, prob))
    sigma = _shift(ops)
    vals, vecs = shift_invert_lowest(ops.A, ops.w, sigma, count)
    for n, eg in enumerate(vals):
        ef = energy(n, prob.l, prob)
        if not is_bound(n, prob.l, prob):
            table.notes.append(f"n={n}: closed form lies in the continuum; truncated")
            break
        table.rows.append(SpectrumRow(n, prob.l, ef, float(eg), abs(float(eg) - ef) / abs(ef)))
    if return_vectors:
        wfs = [RadialWavefunction.from_grid(grid, vecs[:, i], i, prob, ops.w) for i in range(len(table.rows))]
        return table, wfs
    return table


# --- wavefunctions ------------------------------------------------------------------
@dataclass
class RadialWavefunction:
    """Radial function sampled on a log grid, normalised in ``w dt``."""

    r: np.ndarray
    values: np.ndarray
    n: int
    l: Fraction
    h: float
    w: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_grid(cls, grid: LogGrid, values, n: int, prob: RadialProblem, w=None):
        r = grid.r
        if w is None:
            w = (r / (1 + prob.k * r * r)) ** 2
        vals = np.real_if_close(np.asarray(values))
        nrm = math.sqrt(float(np.sum(w * np.abs(vals) ** 2) * grid.h))
        vals = vals / nrm
        i = int(np.argmax(np.abs(vals)))
        if np.real(vals[i]) < 0:
            vals = -vals
        return cls(r, vals, n, prob.l, grid.h, w)

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.w * np.abs(self.values) ** 2) * self.h))

    def boundary_decay(self) -> tuple[float, float]:
        """|rho| sqrt(w) at each end relative to its maximum."""
        amp = np.abs(self.values) * np.sqrt(self.w)
        m = float(amp.max())
        return float(amp[0] / m), float(amp[-1] / m)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["r", "value"])
        for r, v in zip(self.r, np.real(self.values)):
            wr.writerow([_g17(float(r)), _g17(float(v))])
        return buf.getvalue()
