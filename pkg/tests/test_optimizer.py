import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import random_density
from qsource.analytic import ic_maximally_mixed_dephasing, ic_z2_dephasing
from qsource.channels import ChannelProgram, NoiseParams, gauge_transform
from qsource.coherent import (
    SourceState, coherent_information, maximally_mixed_source, z2_source,
)
from qsource.optimizer import (
    OptimizerConfig,
    SourceOptimizer,
    SourcePhaseClassifier,
    ascend_from,
    classify_source,
    ic_gradient,
    optimize_source,
    random_state,
    tangent,
)
from qsource.scan import grid_points, scan_phase_diagram
from qsource.tensor import DensityMatrix, PureState, QubitRegister, parity_of_index

REG2 = QubitRegister(2, 2)


def _orum(n, q_u, q_z):
    return ChannelProgram.orum(n, NoiseParams(q_u=q_u, q_z=q_z))


def test_random_state_determinism_and_norm():
    a, b = random_state(REG2, 7), random_state(REG2, 7)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert abs(np.linalg.norm(a.amplitudes) - 1) < 1e-12


def test_random_states_are_spread_out():
    overlaps = [
        abs(random_state(REG2, 2 * k).overlap(random_state(REG2, 2 * k + 1))) ** 2
        for k in range(100)
    ]
    assert max(overlaps) < 0.9


def test_gradient_vanishes_at_noiseless_optimum():
    src = maximally_mixed_source(2)
    program = ChannelProgram(REG2, ())
    g = ic_gradient(src.psi_rs, program)
    assert np.linalg.norm(tangent(src.psi_rs.amplitudes, g)) < 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    program = _orum(2, *rng.uniform(0, 0.5, 2))
    psi = random_state(REG2, seed)
    g_a = ic_gradient(psi, program)
    g_f = ic_gradient(psi, program, mode="fd")
    assert np.linalg.norm(g_a - g_f) / np.linalg.norm(g_f) < 1e-5


@given(st.integers(0, 2**32 - 1))
def test_projected_gradient_is_tangent(seed):
    psi = random_state(REG2, seed)
    g = tangent(psi.amplitudes, ic_gradient(psi, _orum(2, 0.2, 0.1)))
    assert abs(np.vdot(psi.amplitudes, g).real) < 1e-10


def test_gradient_input_validation():
    with pytest.raises(ValueError, match="registers"):
        ic_gradient(random_state(QubitRegister(1, 1), 0), _orum(2, 0, 0))
    with pytest.raises(ValueError, match="mode"):
        ic_gradient(random_state(REG2, 0), _orum(2, 0, 0), mode="adjoint")


def test_noiseless_optimum_is_maximally_mixed():
    res = optimize_source(_orum(2, 0, 0), OptimizerConfig(restarts=2))
    assert abs(res.i_c - 2) < 1e-4
    assert abs(res.purity_opt - 0.25) < 1e-3
    assert res.q1 == res.i_c / 2


def test_strong_depolarizing_is_no_coding():
    res = optimize_source(_orum(2, 0.6, 0.0), OptimizerConfig(restarts=2))
    assert res.i_c <= 1e-3


def test_z2_source_is_found_where_it_wins():
    est = SourceOptimizer(restarts=2).fit(_orum(2, 0.1, 0.2))
    rho = est.rho_opt_.matrix
    mags = np.abs(rho)
    nz = mags > 1e-3
    assert est.phase_.label == "Z2"
    assert abs(est.purity_ - 0.5) < 1e-2
    assert np.allclose(mags[nz], 2.0**-2, atol=2e-2)
    par = parity_of_index(2)
    assert mags[par[:, None] != par[None, :]].sum() < 1e-3


def test_z2_example_at_low_noise():
    res = optimize_source(_orum(2, 0.05, 0.1), OptimizerConfig(restarts=5))
    mags = np.abs(res.rho_opt.matrix)
    par = parity_of_index(2)
    assert abs(res.purity_opt - 0.5) < 1e-2
    assert np.all(np.abs(mags[mags > 1e-3] - 1 / 16) < 2e-2)
    assert mags[par[:, None] != par[None, :]].sum() < 1e-3


def test_z2_is_only_a_local_maximum_at_low_noise():
    # at (q_z, q_u) = (0.1, 0.05) the Z2 state is stationary but the maximally mixed source wins
    program = _orum(2, 0.05, 0.1)
    z2 = z2_source(2).psi_rs.amplitudes
    start = PureState(REG2, np.concatenate([z2, np.zeros(8)]))
    _, ic_local, _, _ = ascend_from(start, program)
    ic_mm = coherent_information(maximally_mixed_source(2), program).i_c
    assert abs(ic_local - coherent_information(z2_source(2), ChannelProgram.orum(
        2, NoiseParams(0.05, 0.1), n_ref=1)).i_c) < 1e-8
    assert ic_mm > ic_local + 0.1
    est = SourceOptimizer(restarts=5).fit(program)
    assert est.phase_.label == "MaximallyMixed"


def test_result_invariants():
    est = SourceOptimizer(restarts=2, random_state=3).fit(_orum(2, 0.05, 0.15))
    again = coherent_information(SourceState(est.psi_), _orum(2, 0.05, 0.15)).i_c
    assert abs(again - est.i_c_) < 1e-10
    assert est.score(_orum(2, 0.05, 0.15)) == pytest.approx(est.i_c_, abs=1e-12)
    assert np.all(np.diff(est.trace_) >= -1e-9)
    assert est.trace_[-1] == pytest.approx(est.i_c_, abs=1e-15)


def test_restart_determinism():
    a = SourceOptimizer(restarts=2, random_state=11).fit(_orum(2, 0.1, 0.1))
    b = SourceOptimizer(restarts=2, random_state=11).fit(_orum(2, 0.1, 0.1))
    assert np.array_equal(a.psi_.amplitudes, b.psi_.amplitudes)
    assert a.result_.restart_ic == b.result_.restart_ic


def test_estimator_api():
    est = SourceOptimizer(restarts=1, learning_rate=0.02)
    assert est.get_params()["learning_rate"] == 0.02
    twin = clone(est).set_params(restarts=3)
    assert twin.restarts == 3 and est.restarts == 1
    with pytest.raises(NotFittedError):
        est.score(_orum(1, 0, 0))
    with pytest.raises(TypeError):
        est.fit("not a program")
    with pytest.raises(ValueError, match="n_ref == n_sys"):
        est.fit(ChannelProgram.orum(2, NoiseParams(), n_ref=1))
    with pytest.raises(ValueError, match="gradient"):
        SourceOptimizer(gradient="newton").fit(_orum(1, 0, 0))
    with pytest.raises(ValueError):
        SourceOptimizer(learning_rate=-1).fit(_orum(1, 0, 0))


def test_finite_difference_mode_runs():
    est = SourceOptimizer(restarts=1, gradient="fd", max_iters=400).fit(_orum(1, 0, 0.1))
    assert abs(est.i_c_ - ic_maximally_mixed_dephasing(1, 0.1)) < 1e-6


def test_max_iters_is_reported_not_raised():
    est = SourceOptimizer(restarts=1, max_iters=3).fit(_orum(2, 0.1, 0.1))
    assert est.n_iter_ == 3 and not est.converged_


# -- classification -------------------------------------------------------------


def test_classify_examples(rng):
    mm = DensityMatrix(QubitRegister(0, 3), np.eye(8) / 8)
    assert classify_source(mm, 1.0).label == "MaximallyMixed"
    phases = (rng.uniform(0, 2 * np.pi, 4), rng.uniform(0, 2 * np.pi, 4))
    z2 = z2_source(3, phases).system_density()
    assert classify_source(z2, 0.4).label == "Z2"
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    v /= np.linalg.norm(v)
    pure = DensityMatrix(QubitRegister(0, 3), np.outer(v, v.conj()))
    assert classify_source(pure, 1e-6).label == "NoCoding"
    other = DensityMatrix(QubitRegister(0, 3), random_density(3, rng, rank=3))
    assert classify_source(other, 0.5).label == "Other"


@given(st.integers(0, 2**32 - 1), st.sampled_from(["mm", "z2", "other"]))
def test_classification_is_gauge_stable(seed, kind):
    rng = np.random.default_rng(seed)
    reg = QubitRegister(0, 3)
    if kind == "mm":
        rho = DensityMatrix(reg, np.eye(8) / 8)
    elif kind == "z2":
        rho = z2_source(3, (rng.uniform(0, 6, 4), rng.uniform(0, 6, 4))).system_density()
    else:
        rho = DensityMatrix(reg, random_density(3, rng, rank=2))
    theta = rng.uniform(0, 2 * np.pi, 3)
    ic = float(rng.uniform(0, 1))
    assert classify_source(rho, ic).label == classify_source(gauge_transform(rho, theta), ic).label


def test_phase_classifier_estimator():
    res = optimize_source(_orum(1, 0, 0), OptimizerConfig(restarts=1))
    clf = SourcePhaseClassifier().fit()
    mm = DensityMatrix(QubitRegister(0, 2), np.eye(4) / 4)
    assert list(clf.predict([res, (mm, 2.0)])) == ["MaximallyMixed", "MaximallyMixed"]
    assert "Z2" in clf.classes_


# -- scans -------------------------------------------------------------------


def test_scan_origin_is_maximally_mixed():
    (row,) = scan_phase_diagram(grid_points([0.0], [0.0]), 2, OptimizerConfig(restarts=1))
    assert row.phase == "MaximallyMixed" and abs(row.q1 - 1) < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("n,q_z", [(1, 0.3), (2, 0.2), (2, 0.45), (3, 0.1)])
def test_scan_dephasing_row_tracks_analytic_envelope(n, q_z):
    (row,) = scan_phase_diagram(grid_points([0.0], [q_z]), n, OptimizerConfig(restarts=1))
    envelope = max(ic_maximally_mixed_dephasing(n, q_z), ic_z2_dephasing(n, q_z), 0.0)
    assert abs(row.ic_max - envelope) < 5e-3


@pytest.mark.slow
def test_optimization_slows_near_critical_point():
    cfg = OptimizerConfig()
    near, far = scan_phase_diagram(grid_points([0.005], [0.48, 0.1]), 2, cfg)
    assert near.iterations >= 5 * far.iterations, (near.iterations, far.iterations)
