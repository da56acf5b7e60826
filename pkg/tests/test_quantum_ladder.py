from fractions import Fraction

import numpy as np
import pytest

from superint.quantum import (
    RadialProblem,
    annihilation_residual,
    beta_ladder,
    degeneracy,
    direct_quantization_residual,
    eigen_residual,
    eigensolve,
    excited_state,
    factorization_residual,
    ladder,
    ladder_set,
    laplace_beltrami_residual,
    reabsorbed_coupling,
    shape_invariance_residual,
    smooth_test_functions,
    ttw_quantum_build,
)
from superint.quantum.ladder import ground_state, wavefunction


@pytest.mark.parametrize("k", [0.0, 0.05])
def test_operator_identities(k):
    prob = RadialProblem(k=k)
    lset = ladder_set(prob, 0, 4)
    for l in (0, 1, 2.5):
        for f in smooth_test_functions(lset, 5, seed=1):
            assert factorization_residual(lset, l, f) < 1e-6
            assert shape_invariance_residual(lset, l, f) < 1e-6


@pytest.mark.parametrize("k", [0.0, 0.05])
def test_closed_form_kernel(k):
    lset = ladder_set(RadialProblem(k=k), 0, 4)
    for l in (1, 2, 3):
        assert annihilation_residual(lset, l) < 1e-8


@pytest.mark.parametrize("l", [0, 1, 2])
def test_first_excited_state_from_raising(l):
    prob = RadialProblem(k=0.05)
    lset = ladder_set(prob, 0, 4)
    f = lset.raising(l) @ ground_state(lset, l + 1)
    assert eigen_residual(lset, l, f, lset.energy(l + 1), 1) < 1e-6


def test_two_step_chain():
    prob = RadialProblem(k=0.05)
    lset = ladder_set(prob, 0, 5)
    f = excited_state(lset, 2, 1)
    assert eigen_residual(lset, 1, f, lset.energy(3), 2) < 1e-6


def test_ladder_accessor():
    prob = RadialProblem(k=0.05, l=1)
    up, down = ladder(prob, "raise"), ladder(prob, "lower")
    assert up.shape == down.shape
    with pytest.raises(ValueError):
        ladder(prob, "sideways")


def test_ladder_wavefunction_is_normalised():
    prob = RadialProblem(k=0.05)
    lset = ladder_set(prob, 0, 3)
    wf = wavefunction(lset, excited_state(lset, 1, 0), 1, prob)
    assert wf.norm == pytest.approx(1.0)


# --- accidental degeneracy ---------------------------------------------------------
def test_degenerate_pairs_from_formula():
    half = RadialProblem(beta="1/2")
    groups = degeneracy(half, (-1.0, 0.0), 4, 4)
    pair = next(g for g in groups if (0, 1) in g.members)
    assert (2, 0) in pair.members
    two = RadialProblem(beta="2")
    pair = next(g for g in degeneracy(two, (-1.0, 0.0), 4, 4) if (0, 2) in g.members)
    assert (1, 0) in pair.members


@pytest.mark.parametrize("beta", ["1/2", "2"])
def test_groups_follow_progression(beta):
    for g in degeneracy(RadialProblem(k=0.05, beta=beta), (-3.0, 0.5), 10, 10):
        assert g.follows_progression(Fraction(beta))


@pytest.mark.parametrize("beta", ["1/2", "2"])
def test_degenerate_grid_levels(beta):
    prob = RadialProblem(k=0.05, beta=beta)
    groups = [g for g in degeneracy(prob, (-3.0, 3.0), 4, 4) if len(g.members) > 1]
    assert groups
    cache = {}
    for g in groups:
        vals = []
        for n, l in g.members:
            if l not in cache:
                cache[l] = eigensolve(prob.with_l(l), 5)
            vals.append(cache[l].rows[n].E_grid)
        assert max(vals) - min(vals) < 1e-5 * abs(g.energy)


def test_sector_map_between_degenerate_levels():
    res = beta_ladder(RadialProblem(k=0.05, beta="1/2", l=1), 0)
    assert res.target == (2, 0)
    assert res.energy_target == pytest.approx(res.energy_source)
    assert res.residual < 1e-6
    with pytest.raises(ValueError):
        beta_ladder(RadialProblem(beta="2", l=1), 0)


# --- quantization identities -------------------------------------------------------
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("dim", [2, 3, 4])
def test_laplace_beltrami_conjugation(beta, dim):
    assert laplace_beltrami_residual(beta, 0.1, dim, 1) < 1e-6


@pytest.mark.parametrize("beta", ["1/2", "2"])
def test_direct_quantization(beta):
    assert direct_quantization_residual(RadialProblem(k=0.1, beta=beta, dim=3, l=1)) < 1e-6


# --- TTW ----------------------------------------------------------------------------
def test_reabsorbed_coupling():
    assert reabsorbed_coupling(0.5, 2.0) == 0.0
    assert reabsorbed_coupling(1.5, 1.0) == pytest.approx(-2.0)


def test_ttw_reduction_without_barriers():
    op = ttw_quantum_build(0.1, 1.0, 0.5, 0.0, 0.0)
    rho = np.exp(-0.5 * op.grid.t**2)
    for l in (0, 1, 3):
        assert op.reduction_residual(l, rho) < 1e-8


def test_ttw_wedge_is_symmetric():
    op = ttw_quantum_build(0.1, 1.0, 0.5, 0.3, 0.5)
    assert op.hermiticity_defect() < 1e-10
    with pytest.raises(ValueError):
        op.reduction_residual(0, np.ones(op.grid.size))


def test_ttw_validation():
    with pytest.raises(ValueError):
        ttw_quantum_build(0.1, 1.0, 0.5, -0.1, 0.0)
    with pytest.raises(ValueError):
        ttw_quantum_build(-0.1, 1.0, 0.5, 0.0, 0.0)
