"""N-dimensional radial operators and their two-dimensional reduction.

The N-dimensional radial operator in the Kepler chart is

    H_N = g^2/2 (-hbar^2 (d_r^2 + (N-1)/r d_r) + hbar^2 c / r^2) - mu u,
    c = l(l+N-2)/beta^2 + (1/beta^2 - 1)(N-2)^2/4,

and conjugation by ``r^((N-2)/2)`` turns it into the two-dimensional operator
with ``l~ = (l + (N-2)/2)/beta``. The dual eigensolve below discretises H_N
directly (non-symmetric in dt) so the agreement is a genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigs

from ..curvature import conformal_scalar_curvature, perlick_one_omega
from .grid import Boundary, LogGrid
from .radial import DEFAULT_STEP, RadialProblem, _shift, eigensolve, make_grid, operators

__all__ = [
    "reduce",
    "centrifugal_coefficient",
    "nd_eigenvalues",
    "gauge_comparison",
    "laplace_beltrami_residual",
    "direct_quantization_residual",
    "GaugeComparison",
]


def reduce(prob: RadialProblem) -> RadialProblem:
    """Two-dimensional beta = 1 problem with the same radial operator (``l = l~``)."""
    return RadialProblem(prob.k, prob.mu, Fraction(1), prob.hbar, 2, prob.l_tilde)


def centrifugal_coefficient(prob: RadialProblem) -> float:
    N, b, l = prob.dim, float(prob.beta), float(prob.l)
    return l * (l + N - 2) / b**2 + (1.0 / b**2 - 1.0) * (N - 2) ** 2 / 4.0


def nd_eigenvalues(prob: RadialProblem, count: int, h: float = DEFAULT_STEP) -> np.ndarray:
    """Lowest eigenvalues of the undiscounted N-dimensional radial operator.

    Ghost values follow the exact end behaviour ``rho ~ r^a`` with
    ``a = l~ - (N-2)/2`` at the origin and ``a = -l~ - (N-2)/2`` at infinity
    (k > 0); the k = 0 tail is Dirichlet.
    """
    N, lt = prob.dim, prob.l_eff
    grid = make_grid(prob, lt + count - 0.5, h)
    grid = LogGrid.spanning(max(grid.t0, -35.0), grid.t0 + grid.h * (grid.size - 1), h)
    left = Boundary.power(lt - (N - 2) / 2)
    right = Boundary.power(-lt - (N - 2) / 2) if prob.k > 0 else Boundary.dirichlet()
    D1, D2 = grid.D1(left, right), grid.D2(left, right)
    r = grid.r
    g = 1.0 + prob.k * r * r
    w = (r / g) ** 2
    V = -prob.mu * (1.0 - prob.k * r * r) / r
    hb2 = prob.hbar**2
    c = centrifugal_coefficient(prob)
    A = (-0.5 * hb2) * (D2 + (N - 2) * D1) + sp.diags(0.5 * hb2 * c + w * V)
    sigma = _shift(operators(reduce(prob), grid))
    vals = eigs(A.tocsc(), k=count, M=sp.diags(w).tocsc(), sigma=sigma, which="LM",
                return_eigenvectors=False, tol=1e-13)
    return np.sort(vals.real)


@dataclass
class GaugeComparison:
    problem: dict
    reduced_l: str
    nd: list[float]
    reduced: list[float]

    @property
    def max_rel_diff(self) -> float:
        return max(abs(a - b) / abs(b) for a, b in zip(self.nd, self.reduced))

    def to_json(self) -> dict:
        return {"problem": self.problem, "reduced_l": self.reduced_l, "nd": self.nd,
                "reduced": self.reduced, "max_rel_diff": self.max_rel_diff}


def gauge_comparison(prob: RadialProblem, count: int = 5, h: float = DEFAULT_STEP) -> GaugeComparison:
    """Eigenvalues of the direct N-dimensional discretisation against the reduced one."""
    nd = nd_eigenvalues(prob, count, h)
    red = reduce(prob)
    table = eigensolve(red, count, h)
    return GaugeComparison(prob.to_json(), str(red.l), [float(v) for v in nd],
                           [row.E_grid for row in table.rows])


# --- quantization identities -------------------------------------------------------
def _test_bumps(t: np.ndarray, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c, s, a = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.0), rng.uniform(-1.0, 1.0)
        out.append(np.exp(-0.5 * ((t - c) / s) ** 2) * (1.0 + a * (t - c)))
    return out


def _window(h: float) -> LogGrid:
    return LogGrid.spanning(-12.0, 12.0, h)


def laplace_beltrami_residual(beta: float, k: float, dim: int, l: int, mu: float = 1.0, hbar: float = 1.0,
                              count: int = 5, seed: int = 0, h: float = DEFAULT_STEP) -> float:
    """Max over test functions of ``|f^((2-N)/4) H_d f^((N-2)/4) phi - H_LB phi| / |H_LB phi|``.

    Metric ``f delta`` with ``f = 1/(r^2 (r^-beta + k r^beta)^2)``; ``H_d`` is
    ``-hbar^2/(2f) Laplacian + V`` and ``H_LB`` the Laplace-Beltrami operator
    plus ``hbar^2 (N-2)/(8(N-1)) R``, both restricted to angular sector ``l``.
    """
    grid = _window(h)
    t, r = grid.t, grid.r
    D1, D2 = grid.D1(), grid.D2()
    N = dim
    omega, w1, w2 = perlick_one_omega(r, beta, k)
    f = np.exp(2 * omega)
    R = conformal_scalar_curvature(r, w1, w2, N) / f
    V = -mu * (r ** (-beta) - k * r**beta)
    ang = l * (l + N - 2)
    pre = -hbar**2 / (2 * f * r * r)

    def direct(phi):
        return pre * (D2 @ phi + (N - 2) * (D1 @ phi) - ang * phi) + V * phi

    def laplace_beltrami(phi):
        drift = (N - 2) * (1.0 + r * w1)
        kin = pre * (D2 @ phi + drift * (D1 @ phi) - ang * phi)
        return kin + V * phi + hbar**2 * (N - 2) / (8.0 * (N - 1)) * R * phi

    s = np.exp((N - 2) * omega / 2)
    worst = 0.0
    inner = slice(8, grid.size - 8)
    for phi in _test_bumps(t, count, seed):
        lhs = direct(s * phi) / s
        rhs = laplace_beltrami(phi)
        worst = max(worst, float(np.linalg.norm((lhs - rhs)[inner]) / np.linalg.norm(rhs[inner])))
    return worst


def direct_quantization_residual(prob: RadialProblem, count: int = 5, seed: int = 0,
                                 h: float = DEFAULT_STEP) -> float:
    """Gauge identity between the Kepler-chart operator and the direct quantization.

    With ``r = r'^beta`` and ``a = (N-2)(1-beta)/2``::

        r'^-a H_N r'^a = -hbar^2 r'^2 q^2 / (2 beta^2) Laplacian_N - mu (r'^-beta - k r'^beta)

    ``q = r'^-beta + k r'^beta``. Both sides act on sector-``l`` test functions
    of ``t' = ln r'``; returns the max relative residual.
    """
    grid = _window(h)
    tp, rp = grid.t, grid.r
    D1, D2 = grid.D1(), grid.D2()
    N, b, k, l = prob.dim, float(prob.beta), prob.k, float(prob.l)
    hb2 = prob.hbar**2
    q = rp ** (-b) + k * rp**b
    V = -prob.mu * (rp ** (-b) - k * rp**b)
    c = centrifugal_coefficient(prob)
    a = (N - 2) * (1 - b) / 2

    def kepler_chart(phi):
        # g^2/r^2 = q^2 and d/dt = (1/beta) d/dt' for t = ln r = beta t'
        return -0.5 * hb2 * q * q * (D2 @ phi / b**2 + (N - 2) * (D1 @ phi) / b - c * phi) + V * phi

    def direct(phi):
        return -hb2 * q * q / (2 * b * b) * (D2 @ phi + (N - 2) * (D1 @ phi) - l * (l + N - 2) * phi) + V * phi

    gauge = np.exp(a * tp)
    worst = 0.0
    inner = slice(8, grid.size - 8)
    for phi in _test_bumps(tp, count, seed):
        lhs = kepler_chart(gauge * phi) / gauge
        rhs = direct(phi)
        worst = max(worst, float(np.linalg.norm((lhs - rhs)[inner]) / np.linalg.norm(rhs[inner])))
    return worst
