"""Uniform grids in t = ln r and 8th-order central difference matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["LogGrid", "Boundary", "difference_matrix", "fourier_second_derivative", "D1_COEFFS", "D2_COEFFS"]

D1_COEFFS = {1: 4 / 5, 2: -1 / 5, 3: 4 / 105, 4: -1 / 280}
D2_COEFFS = {0: -205 / 72, 1: 8 / 5, 2: -1 / 5, 3: 8 / 315, 4: -1 / 560}


def _stencil(order: int) -> dict[int, float]:
    if order == 1:
        out = {m: c for m, c in D1_COEFFS.items()}
        out.update({-m: -c for m, c in D1_COEFFS.items()})
        return out
    if order == 2:
        out = dict(D2_COEFFS)
        out.update({-m: c for m, c in D2_COEFFS.items() if m})
        return out
    raise ValueError("order must be 1 or 2")


@dataclass(frozen=True)
class Boundary:
    """How ghost values beyond a grid end are filled.

    ``reflect`` mirrors about the half-cell point past the last node with the
    given sign (-1 Dirichlet, +1 Neumann, both keep symmetric stencils
    symmetric); ``zero`` sets ghosts to 0; ``power`` continues the boundary
    value as ``exp(rate * dt)``, i.e. ``rho ~ r^rate`` in t = ln r.
    """

    kind: str = "zero"
    value: float = 0.0

    @classmethod
    def dirichlet(cls):
        return cls("reflect", -1.0)

    @classmethod
    def neumann(cls):
        return cls("reflect", 1.0)

    @classmethod
    def power(cls, rate: float):
        return cls("power", float(rate))


def difference_matrix(M: int, h: float, order: int, left: Boundary = Boundary(),
                      right: Boundary = Boundary()) -> sp.csr_matrix:
    """Sparse 8th-order central difference matrix of ``order`` 1 or 2 on M nodes."""
    st = _stencil(order)
    rows, cols, vals = [], [], []

    def put(i, j, c):
        rows.append(i)
        cols.append(j)
        vals.append(c)

    for i in range(M):
        for m, c in st.items():
            j = i + m
            if 0 <= j < M:
                put(i, j, c)
            elif j < 0:
                _ghost(put, i, j, c, left, M, side="left", h=h)
            else:
                _ghost(put, i, j, c, right, M, side="right", h=h)
    D = sp.csr_matrix((vals, (rows, cols)), shape=(M, M))
    D.sum_duplicates()
    return D / h**order


def _ghost(put, i, j, c, bc: Boundary, M: int, side: str, h: float):
    if bc.kind == "zero":
        return
    if side == "left":
        mirror, edge, dist = -1 - j, 0, -j
    else:
        mirror, edge, dist = 2 * M - 1 - j, M - 1, j - (M - 1)
    if bc.kind == "reflect":
        put(i, mirror, bc.value * c)
    elif bc.kind == "power":
        # ghost at signed offset from the edge node
        step = -dist if side == "left" else dist
        put(i, edge, c * math.exp(bc.value * step * h))
    else:
        raise ValueError(f"unknown boundary kind {bc.kind!r}")


@dataclass(frozen=True)
class LogGrid:
    """Nodes ``t_j = t0 + j h`` with ``r = exp(t)``."""

    t0: float
    h: float
    size: int

    @classmethod
    def spanning(cls, t_left: float, t_right: float, h: float) -> "LogGrid":
        M = int(math.ceil((t_right - t_left) / h)) + 1
        return cls(t_left, (t_right - t_left) / (M - 1), M)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.size)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.t)

    def D1(self, left: Boundary = Boundary(), right: Boundary = Boundary()):
        return difference_matrix(self.size, self.h, 1, left, right)

    def D2(self, left: Boundary = Boundary(), right: Boundary = Boundary()):
        return difference_matrix(self.size, self.h, 2, left, right)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.h)


def fourier_second_derivative(M: int, period: float = 2 * math.pi) -> np.ndarray:
    """Dense spectral second-derivative matrix on M (even) periodic nodes; symmetric."""
    if M % 2:
        raise ValueError("spectral matrix needs an even number of nodes")
    h = 2 * math.pi / M
    j = np.arange(M)
    diff = j[:, None] - j[None, :]
    with np.errstate(divide="ignore"):
        off = -0.5 * (-1.0) ** diff / np.sin(diff * h / 2) ** 2
    D = np.where(diff == 0, -(math.pi**2) / (3 * h * h) - 1 / 6, off)
    return D * (2 * math.pi / period) ** 2
