"""Radial quantum sector: closed-form spectra, grid oracle, ladder operators, reductions."""

from .degeneracy import BetaLadderResult, DegeneracyGroup, beta_ladder, degeneracy
from .grid import Boundary, LogGrid
from .ladder import (
    LadderSet,
    annihilation_residual,
    eigen_residual,
    excited_state,
    factorization_energy,
    factorization_residual,
    ground_state,
    ladder,
    ladder_set,
    shape_invariance_residual,
    smooth_test_functions,
)
from .radial import (
    GridResolutionError,
    RadialProblem,
    RadialWavefunction,
    SpectrumTable,
    eigensolve,
    energy,
    is_bound,
    kepler_energy,
)
from .reduction import (
    GaugeComparison,
    direct_quantization_residual,
    gauge_comparison,
    laplace_beltrami_residual,
    nd_eigenvalues,
    reduce,
)
from .ttw import TTWOperator, reabsorbed_coupling, ttw_quantum_build

__all__ = [
    "BetaLadderResult", "Boundary", "DegeneracyGroup", "GaugeComparison", "GridResolutionError",
    "LadderSet", "LogGrid", "RadialProblem", "RadialWavefunction", "SpectrumTable", "TTWOperator",
    "annihilation_residual", "beta_ladder", "degeneracy", "direct_quantization_residual",
    "eigen_residual", "eigensolve", "energy", "excited_state", "factorization_energy",
    "factorization_residual", "gauge_comparison", "ground_state", "is_bound", "kepler_energy",
    "ladder", "ladder_set", "laplace_beltrami_residual", "nd_eigenvalues", "reabsorbed_coupling",
    "reduce", "shape_invariance_residual", "smooth_test_functions", "ttw_quantum_build",
]
