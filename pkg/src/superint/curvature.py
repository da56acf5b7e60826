"""Scalar curvature of conformally flat radial metrics.

Two independent routes: a finite-difference evaluation of the Riemannian
scalar curvature from metric samples alone, and the conformal-factor formula
for ``g = exp(2 omega(r)) delta`` in N dimensions. The first is used to check
closed forms; the second feeds the quantum curvature term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .systems import SystemSpec

__all__ = [
    "scalar_curvature_fd",
    "conformal_metric",
    "conformal_scalar_curvature",
    "perlick_one_omega",
    "perlick_one_curvature",
    "perlick_one_slice_curvature",
    "curvature_check",
    "CurvatureReport",
]

# 5-point central stencils
_D1 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
_D2 = ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))


def _metric_derivatives(metric: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float):
    n = x.size
    g = metric(x)
    dg = np.zeros((n, n, n))  # dg[k] = d_k g
    ddg = np.zeros((n, n, n, n))  # ddg[k, l] = d_k d_l g
    eye = np.eye(n)
    cache = {}

    def at(offset):
        key = tuple(offset)
        if key not in cache:
            cache[key] = metric(x + h * np.asarray(offset, dtype=float))
        return cache[key]

    for k in range(n):
        for s, c in _D1:
            dg[k] += c * at(s * eye[k])
        dg[k] /= h
        for s, c in _D2:
            ddg[k, k] += c * at(s * eye[k])
        ddg[k, k] /= h * h
        for l in range(k + 1, n):
            acc = np.zeros((n, n))
            for s1, c1 in _D1:
                for s2, c2 in _D1:
                    acc += c1 * c2 * at(s1 * eye[k] + s2 * eye[l])
            ddg[k, l] = ddg[l, k] = acc / (h * h)
    return g, dg, ddg


def _scalar_from_derivatives(g, dg, ddg) -> float:
    gi = np.linalg.inv(g)
    # Christoffel symbols of the first kind and their derivatives
    # G1[m, j, k] = 1/2 (d_j g_mk + d_k g_mj - d_m g_jk)
    G1 = 0.5 * (np.einsum("jmk->mjk", dg) + np.einsum("kmj->mjk", dg) - dg)
    dG1 = 0.5 * (np.einsum("ljmk->lmjk", ddg) + np.einsum("lkmj->lmjk", ddg)
                 - np.einsum("lmjk->lmjk", ddg))
    Gam = np.einsum("im,mjk->ijk", gi, G1)
    dgi = -np.einsum("ia,lab,bm->lim", gi, dg, gi)
    dGam = np.einsum("lim,mjk->lijk", dgi, G1) + np.einsum("im,lmjk->lijk", gi, dG1)
    # Ric_jl = d_i G^i_jl - d_l G^i_ji + G^i_ip G^p_jl - G^i_lp G^p_ji
    ric = (np.einsum("iijl->jl", dGam) - np.einsum("liji->jl", dGam)
           + np.einsum("iip,pjl->jl", Gam, Gam) - np.einsum("ilp,pji->jl", Gam, Gam))
    return float(np.einsum("jl,jl->", gi, ric))


def scalar_curvature_fd(metric: Callable[[np.ndarray], np.ndarray], x: Sequence[float],
                        h: float, richardson: bool = True) -> float:
    """Scalar curvature at ``x`` of the metric field ``metric(x) -> (n, n)``.

    Metric derivatives use 5-point stencils of step ``h``; with ``richardson``
    the result at ``h`` and ``h/2`` is combined to cancel the leading error.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    r_h = _scalar_from_derivatives(*_metric_derivatives(metric, x, h))
    if not richardson:
        return r_h
    r_h2 = _scalar_from_derivatives(*_metric_derivatives(metric, x, h / 2))
    return (16.0 * r_h2 - r_h) / 15.0


def conformal_metric(factor: Callable[[float], float]) -> Callable[[np.ndarray], np.ndarray]:
    """``g(x) = factor(|x|) * identity``."""

    def metric(x):
        return factor(float(np.linalg.norm(x))) * np.eye(x.size)

    return metric


def conformal_scalar_curvature(r, omega1, omega2, dim: int):
    """Scalar curvature of ``exp(2 omega(r)) delta`` in ``dim`` dimensions.

    ``omega1, omega2`` are the first and second radial derivatives of omega
    and ``exp(-2 omega)`` must be folded in by the caller::

        R exp(2 omega) = -2(n-1)(omega'' + (n-1) omega'/r) - (n-2)(n-1) omega'^2
    """
    n = dim
    lap = omega2 + (n - 1) * omega1 / r
    return -2.0 * (n - 1) * lap - (n - 2) * (n - 1) * omega1 * omega1


def perlick_one_omega(r, beta: float, k: float):
    """(omega, omega', omega'') for ``exp(2 omega) = 1 / (r q)^2``, ``q = r^-beta + k r^beta``."""
    a = r ** (-beta)
    b = k * r ** beta
    q = a + b
    qp = (-beta * a + beta * b) / r
    qpp = (beta * (beta + 1) * a + beta * (beta - 1) * b) / (r * r)
    omega = -np.log(r) - np.log(q)
    w1 = -1.0 / r - qp / q
    w2 = 1.0 / (r * r) - qpp / q + (qp / q) ** 2
    return omega, w1, w2


def perlick_one_curvature(r, beta: float, k: float):
    """Closed form ``2(1 - beta^2) q^2 + 24 beta^2 k`` of the 3D metric."""
    q = r ** (-beta) + k * r ** beta
    return 2.0 * (1.0 - beta * beta) * q * q + 24.0 * beta * beta * k


def perlick_one_slice_curvature(beta: float, k: float) -> float:
    """Constant curvature ``8 beta^2 k`` of the two-dimensional slice."""
    return 8.0 * beta * beta * k


@dataclass
class CurvatureReport:
    system: dict
    h_rel: float
    rows: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        errs = [row[k] for row in self.rows for k in ("err_3d", "err_2d")]
        return max(errs) if errs else 0.0

    def passed(self, tol: float = 1e-6) -> bool:
        return bool(self.rows) and self.max_error < tol

    def to_json(self) -> dict:
        return {"system": self.system, "h_rel": self.h_rel, "max_error": self.max_error,
                "rows": self.rows, "notes": self.notes}


_DIRECTION = np.array([0.6, 0.48, 0.64])  # unit vector off every coordinate plane


def curvature_check(spec: SystemSpec, radii: Sequence[float], h_rel: float = 1e-2) -> CurvatureReport:
    """Compare finite-difference curvature of the Perlick I metric with its closed forms.

    Errors are absolute for |R| <= 1 and relative above.
    """
    if spec.family != "PerlickI":
        raise ValueError("curvature closed forms are known for the PerlickI family only")
    beta, k = float(spec.beta), spec.k

    def factor(r):
        q = r ** (-beta) + k * r ** beta
        return 1.0 / (r * q) ** 2

    metric = conformal_metric(factor)
    report = CurvatureReport(spec.to_json(), h_rel)
    r2d = perlick_one_slice_curvature(beta, k)
    for r in radii:
        r = float(r)
        if r <= 0:
            report.notes.append(f"r={r!r}: not positive, skipped")
            continue
        q = r ** (-beta) + k * r ** beta
        if abs(q) < 1e-8 or abs(q) * r ** beta > 1e8:
            report.notes.append(f"r={r!r}: conformal factor singular, skipped")
            continue
        h = h_rel * r
        num3 = scalar_curvature_fd(metric, r * _DIRECTION, h)
        num2 = scalar_curvature_fd(metric, r * _DIRECTION[:2] / np.linalg.norm(_DIRECTION[:2]), h)
        ref3 = perlick_one_curvature(r, beta, k)
        report.rows.append({
            "r": r,
            "R_3d_numeric": num3,
            "R_3d_closed": ref3,
            "err_3d": abs(num3 - ref3) / max(1.0, abs(ref3)),
            "R_2d_numeric": num2,
            "R_2d_closed": r2d,
            "err_2d": abs(num2 - r2d) / max(1.0, abs(r2d)),
        })
    return report
