"""Two-dimensional curved TTW operator on an (r, theta') tensor grid.

    H = g^2/2 (-hbar^2 (d_r^2 + d_r/r + d_theta'^2 / r^2)
               + b1 / (r^2 cos^2(theta'/beta)) + b2 / (r^2 sin^2(theta'/beta))) - mu u

Multiplied by ``w = r^2/g^2`` on t = ln r this is symmetric, i.e. H is
self-adjoint in ``w dt dtheta'``. With b1 = b2 = 0 the angle is periodic and
Fourier-differentiated; otherwise the wedge ``0 < theta' < beta pi/2`` carries
Dirichlet ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import Boundary, LogGrid, difference_matrix, fourier_second_derivative
from .radial import DEFAULT_STEP, RadialProblem, operators

__all__ = ["TTWOperator", "ttw_quantum_build", "reabsorbed_coupling"]


def reabsorbed_coupling(l_i: float, beta: float) -> float:
    """``(1 - 4 l_i^2) / (4 beta^2)``: coupling carrying a reduced angular quantum number."""
    return (1.0 - 4.0 * l_i * l_i) / (4.0 * beta * beta)


@dataclass
class TTWOperator:
    k: float
    mu: float
    beta: float
    b1: float
    b2: float
    hbar: float
    grid: LogGrid
    theta: np.ndarray
    periodic: bool
    A: sp.csr_matrix  # W H
    w: np.ndarray  # weight on the flattened (t, theta) grid

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.size, self.theta.size

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """H psi for psi of shape (n_t, n_theta) (complex allowed)."""
        flat = psi.reshape(-1)
        return ((self.A @ flat) / self.w).reshape(self.shape)

    def hermiticity_defect(self) -> float:
        """max |A - A^T| / max |A| with ``A = W H``."""
        diff = (self.A - self.A.T).tocoo()
        top = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        return top / float(np.abs(self.A.data).max())

    def reduction_residual(self, l: int, rho: np.ndarray) -> float:
        """``|H (rho e^{i l theta'}) - (H_l rho) e^{i l theta'}| / |H_l rho|`` in the weighted norm.

        ``H_l`` is the radial curved Kepler operator with ``l~ = l``; requires
        the periodic (b = 0) build.
        """
        if not self.periodic:
            raise ValueError("the e^{i l theta'} reduction needs b1 = b2 = 0")
        mode = np.exp(1j * l * self.theta)
        lhs = self.apply(rho[:, None] * mode[None, :])
        prob = RadialProblem(self.k, self.mu, hbar=self.hbar)
        radial = operators(prob, self.grid, float(l), (Boundary(), Boundary()))
        rhs = radial.apply_H(rho)[:, None] * mode[None, :]
        w = self.w.reshape(self.shape)
        num = math.sqrt(float(np.sum(w * np.abs(lhs - rhs) ** 2)))
        den = math.sqrt(float(np.sum(w * np.abs(rhs) ** 2)))
        return num / den


def ttw_quantum_build(k: float, mu: float, beta: float, b1: float, b2: float, hbar: float = 1.0,
                      t_range: tuple[float, float] = (-12.0, 12.0), h: float = DEFAULT_STEP * 5,
                      n_theta: int = 32) -> TTWOperator:
    """Assemble ``W H`` on the tensor grid (radial ghosts vanish; angle as described above)."""
    if b1 < 0 or b2 < 0:
        raise ValueError("b1, b2 must be non-negative")
    if k < 0:
        raise ValueError("k < 0 is out of scope")
    grid = LogGrid.spanning(*t_range, h)
    r = grid.r
    g = 1.0 + k * r * r
    wr = (r / g) ** 2
    V = -mu * (1.0 - k * r * r) / r
    Dt = grid.D2()
    periodic = b1 == 0 and b2 == 0
    if periodic:
        theta = 2 * math.pi * np.arange(n_theta) / n_theta
        Dth = sp.csr_matrix(fourier_second_derivative(n_theta))
        barrier = np.zeros(n_theta)
    else:
        width = beta * math.pi / 2
        dth = width / n_theta
        theta = (np.arange(n_theta) + 0.5) * dth
        Dth = difference_matrix(n_theta, dth, 2, Boundary.dirichlet(), Boundary.dirichlet())
        barrier = b1 / np.cos(theta / beta) ** 2 + b2 / np.sin(theta / beta) ** 2
    It, Ith = sp.identity(grid.size), sp.identity(n_theta)
    hb2 = hbar * hbar
    A = (-0.5 * hb2) * (sp.kron(Dt, Ith) + sp.kron(It, Dth)) \
        + sp.kron(It, sp.diags(0.5 * barrier)) + sp.kron(sp.diags(wr * V), Ith)
    w = np.kron(wr, np.ones(n_theta))
    return TTWOperator(k, mu, beta, b1, b2, hbar, grid, theta, periodic, A.tocsr(), w)
