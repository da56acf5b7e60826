"""Ladder operators of the radial curved Kepler operator on the log grid.

With ``g = 1 + k r^2`` and ``u = (1 - k r^2)/r``::

    a+_l = -i/sqrt2 (hbar g d_r - mu/(hbar (l+1/2)) + hbar (l+1) u)
    a_l  = -i/sqrt2 (hbar g d_r + mu/(hbar (l+1/2)) - hbar l u)

so that ``a+_l a_l = H_l - E_l`` and ``a_l a+_l + E_l = H_{l+1}``, with
``E_l = -mu^2 / (2 hbar^2 (l+1/2)^2) + 2 k hbar^2 l (l+1)``. The angular label
``l`` is any real ``>= 0`` so the same objects serve every reduced sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Boundary, LogGrid
from .radial import DEFAULT_STEP, RadialProblem, RadialWavefunction, check_resolution, kepler_energy, operators

__all__ = [
    "LadderSet",
    "ladder",
    "ladder_set",
    "factorization_energy",
    "ground_state",
    "excited_state",
    "smooth_test_functions",
    "factorization_residual",
    "shape_invariance_residual",
    "annihilation_residual",
    "eigen_residual",
]

_PHASE = -1j / math.sqrt(2.0)


def factorization_energy(l: float, k: float, mu: float, hbar: float) -> float:
    return kepler_energy(l + 0.5, k, mu, hbar)


@dataclass
class LadderSet:
    """Grid for a family of sectors with matrix builders keyed by real ``l``."""

    prob: RadialProblem
    grid: LogGrid

    def __post_init__(self):
        r = self.grid.r
        self.r = r
        self.g = 1.0 + self.prob.k * r * r
        self.u = (1.0 - self.prob.k * r * r) / r
        self.w = (r / self.g) ** 2
        # functions handled here vanish beyond both ends
        self._dr = sp.diags(self.g / r) @ self.grid.D1(Boundary(), Boundary())
        self._A0 = operators(self.prob, self.grid, 0.0, (Boundary(), Boundary())).A

    def raising(self, l: float) -> sp.csr_matrix:
        p = self.prob
        diag = -p.mu / (p.hbar * (l + 0.5)) + p.hbar * (l + 1) * self.u
        return (_PHASE * (p.hbar * self._dr + sp.diags(diag))).tocsr()

    def lowering(self, l: float) -> sp.csr_matrix:
        p = self.prob
        diag = p.mu / (p.hbar * (l + 0.5)) - p.hbar * l * self.u
        return (_PHASE * (p.hbar * self._dr + sp.diags(diag))).tocsr()

    def pencil(self, l: float) -> sp.csr_matrix:
        """``A_l = W H_l`` (symmetric part of the pencil ``A_l - E W``)."""
        return (self._A0 + sp.diags(np.full(self.grid.size, 0.5 * self.prob.hbar**2 * l * l))).tocsr()

    def hamiltonian(self, l: float) -> sp.csr_matrix:
        return (sp.diags(1.0 / self.w) @ self.pencil(l)).tocsr()

    def interior(self, applications: int) -> slice:
        """Nodes untouched by ghost values after ``applications`` stencil applications."""
        m = 4 * applications
        return slice(m, self.grid.size - m)

    def energy(self, l: float) -> float:
        return factorization_energy(l, self.prob.k, self.prob.mu, self.prob.hbar)

    def norm(self, f: np.ndarray) -> float:
        return math.sqrt(self.grid.integrate(self.w * np.abs(f) ** 2))


def ladder_set(prob: RadialProblem, l_min: float = 0.0, l_max: float = 4.0,
               h: float = DEFAULT_STEP) -> LadderSet:
    """Grid wide enough for closed-form ground states with ``l_min + 1 <= l + 1 <= l_max + 1``."""
    lt_floor = l_min + 1.0
    left = -max(35.0, 30.0 / lt_floor)
    if prob.k > 0:
        right = -0.5 * math.log(prob.k) + max(35.0, 30.0 / lt_floor)
    else:
        nu = l_max + 1.5
        # keep unit-scale test bumps far from the end as well
        right = max(math.log(prob.hbar**2 * nu * (2.0 * nu + 40.0) / prob.mu), 12.0)
    return LadderSet(prob, LogGrid.spanning(left, right, h))


def ladder(prob: RadialProblem, direction: str, lset: LadderSet | None = None) -> sp.csr_matrix:
    """a+ (``raise``) or a (``lower``) for the problem's own sector ``l~``."""
    lset = lset or ladder_set(prob, prob.l_eff, prob.l_eff + 2)
    check_resolution(operators(prob, lset.grid), factorization_energy(prob.l_eff + 2, prob.k, prob.mu, prob.hbar))
    if direction == "raise":
        return lset.raising(prob.l_eff)
    if direction == "lower":
        return lset.lowering(prob.l_eff)
    raise ValueError("direction must be 'raise' or 'lower'")


def ground_state(lset: LadderSet, l: float) -> np.ndarray:
    """Closed-form kernel of ``a_l``: ``(r/g)^l exp(-mu/(hbar^2 sqrt(k) (l+1/2)) arctan(sqrt(k) r))``."""
    p = lset.prob
    r = lset.r
    if p.k > 0:
        sk = math.sqrt(p.k)
        phase = p.mu / (p.hbar**2 * sk * (l + 0.5)) * np.arctan(sk * r)
    else:
        phase = p.mu * r / (p.hbar**2 * (l + 0.5))
    return np.exp(l * np.log(r / lset.g) - phase)


def excited_state(lset: LadderSet, n: int, l: float) -> np.ndarray:
    """``a+_l a+_{l+1} ... a+_{l+n-1}`` applied to the kernel of ``a_{l+n}``; level ``E_{l+n}`` of ``H_l``."""
    f = ground_state(lset, l + n).astype(complex)
    for j in range(n - 1, -1, -1):
        f = lset.raising(l + j) @ f
    return f


def smooth_test_functions(lset: LadderSet, count: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Gaussian bumps in t times a random linear factor, centred near r ~ 1."""
    rng = np.random.default_rng(seed)
    t = lset.grid.t
    out = []
    for _ in range(count):
        c = rng.uniform(-1.5, 1.5)
        s = rng.uniform(0.6, 1.2)
        a = rng.uniform(-1.0, 1.0)
        out.append(np.exp(-0.5 * ((t - c) / s) ** 2) * (1.0 + a * (t - c)))
    return out


def _rel(lset: LadderSet, res, f) -> float:
    return lset.norm(res) / lset.norm(f)


def factorization_residual(lset: LadderSet, l: float, f: np.ndarray) -> float:
    """``|(a+_l a_l - H_l + E_l) f| / |f|``."""
    res = lset.raising(l) @ (lset.lowering(l) @ f) - lset.hamiltonian(l) @ f + lset.energy(l) * f
    return _rel(lset, res, f)


def shape_invariance_residual(lset: LadderSet, l: float, f: np.ndarray) -> float:
    """``|(a_l a+_l + E_l - H_{l+1}) f| / |f|``."""
    res = lset.lowering(l) @ (lset.raising(l) @ f) + lset.energy(l) * f - lset.hamiltonian(l + 1) @ f
    return _rel(lset, res, f)


def annihilation_residual(lset: LadderSet, l: float) -> float:
    """``|a_l rho_0| / |rho_0|`` for the closed-form kernel ``rho_0`` of ``a_l``."""
    f = ground_state(lset, l)
    return _rel(lset, lset.lowering(l) @ f, f)


def eigen_residual(lset: LadderSet, l: float, f: np.ndarray, E: float, applications: int = 1) -> float:
    """Backward error ``|(A_l - E W) f| / (|A_l f| + |E| |W f|)`` of an eigenpair.

    Written with ``A_l = W H_l`` so the ``1/r^2`` growth of ``H_l`` near the
    origin never multiplies rounding errors; norms are over the nodes not
    reached by ghost values after ``applications`` operator applications.
    """
    sl = lset.interior(applications + 1)
    Af = (lset.pencil(l) @ f)[sl]
    Wf = (lset.w * f)[sl]
    return float(np.linalg.norm(Af - E * Wf) / (np.linalg.norm(Af) + abs(E) * np.linalg.norm(Wf)))


def wavefunction(lset: LadderSet, f: np.ndarray, n: int, prob: RadialProblem) -> RadialWavefunction:
    vals = f * np.exp(-1j * np.angle(f[np.argmax(np.abs(f))]))
    return RadialWavefunction.from_grid(lset.grid, np.real(vals), n, prob, lset.w)
