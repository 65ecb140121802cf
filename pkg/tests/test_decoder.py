import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dilutedmp.decoder import compile_sequence, decode, max_iteration_budget, stage_budgets
from dilutedmp.geometry import build_surface_code, dilution_sequence
from dilutedmp.mp import MpConfig
from dilutedmp.noise import NoiseModel, prior_of, sample, trial_rng
from dilutedmp.pauli import PauliConfig, ResidualClass, Syndrome, classify_residual, syndrome


@pytest.mark.parametrize("d,budget", [(2, 20), (3, 60), (5, 120), (9, 200), (17, 300), (65, 560)])
def test_max_budget(d, budget):
    assert max_iteration_budget(d) == budget


def test_stage_budgets():
    assert stage_budgets(2) == (20, 40, 60)
    assert stage_budgets(0) == (20,)


def test_zero_syndrome():
    code = build_surface_code(5)
    out = decode(code, compile_sequence(5, "DV"), syndrome(code, PauliConfig.identity(code.n)),
                 prior_of(NoiseModel("depolarizing", 0.05)), MpConfig())
    assert out.converged and out.stage_of_convergence == 0 and out.total_iterations == 1
    assert out.estimate.weight == 0


def test_sequence_mismatch():
    code = build_surface_code(5)
    prior = prior_of(NoiseModel("x", 0.05))
    syn = syndrome(code, PauliConfig.identity(code.n))
    with pytest.raises(ValueError):
        decode(code, compile_sequence(7, "CH"), syn, prior, MpConfig())
    with pytest.raises(ValueError):
        decode(code, compile_sequence(5, "CH"), Syndrome(syn.z_bits[:-1], syn.x_bits), prior, MpConfig())
    with pytest.raises(ValueError):
        decode(code, compile_sequence(5, "CH"), syn, prior, MpConfig(), budgets=(20, 40))


def test_explicit_sequence_matches_cached():
    code = build_surface_code(5)
    model = NoiseModel("depolarizing", 0.1)
    e = sample(model, code.n, trial_rng(4, 4))
    syn = syndrome(code, e)
    a = decode(code, compile_sequence(dilution_sequence(code, "DV")), syn, prior_of(model), MpConfig())
    b = decode(code, compile_sequence(5, "DV"), syn, prior_of(model), MpConfig())
    assert a.estimate == b.estimate and a.total_iterations == b.total_iterations


def _decode_records(d, kind, p, seed, family):
    code = build_surface_code(d)
    model = NoiseModel(kind, p)
    e = sample(model, code.n, trial_rng(seed, d))
    syn = syndrome(code, e)
    comp = compile_sequence(d, family)
    out = decode(code, comp, syn, prior_of(model), MpConfig(), keep_records=True)
    return code, comp, e, syn, out


@settings(max_examples=30)
@given(st.sampled_from([5, 9]), st.floats(0.05, 0.25), st.integers(0, 10**6), st.sampled_from(["DV", "DH", "CH"]))
def test_syndrome_bookkeeping(d, p, seed, family):
    code, comp, e, syn, out = _decode_records(d, "depolarizing", p, seed, family)
    frozen_syn = Syndrome(np.zeros_like(syn.z_bits), np.zeros_like(syn.x_bits))
    for rec in out.records:
        # frozen corrections so far, xor the residual fed to this stage, give the input
        assert frozen_syn ^ rec.residual_before == syn
        if rec.frozen_after is not None:
            frozen_syn = frozen_syn ^ syndrome(code, rec.frozen_after)
    assert len(out.per_stage_iterations) == len(out.records)
    assert out.total_iterations == sum(out.per_stage_iterations)
    assert out.total_iterations <= max_iteration_budget(d)
    for k, it in enumerate(out.per_stage_iterations):
        assert it <= 20 * (k + 1)


@settings(max_examples=30)
@given(st.sampled_from([5, 9]), st.floats(0.05, 0.25), st.integers(0, 10**6))
def test_converged_outcomes(d, p, seed):
    code, comp, e, syn, out = _decode_records(d, "depolarizing", p, seed, "DV")
    if out.converged:
        assert syndrome(code, out.estimate) == syn
        assert classify_residual(code, out.estimate ^ e) is not ResidualClass.SYNDROME_MISMATCH
    else:
        assert out.stage_of_convergence is None


@pytest.mark.parametrize("d", [3, 5, 9, 17])
@pytest.mark.parametrize("family", ["DV", "CH"])
def test_stage_partition(d, family):
    comp = compile_sequence(d, family)
    counts = np.zeros(comp.code.n, dtype=int)
    for dq in comp.decimated:
        counts[dq] += 1
    counts[comp.plans[-1].act] += 1
    assert (counts == 1).all()


def _all_errors(n, t):
    for w in range(t + 1):
        yield from itertools.combinations(range(n), w)


@pytest.mark.parametrize("d", [3, 5])
def test_single_x_radius(d):
    """Every X error of weight <= (d-1)//2 is corrected."""
    code = build_surface_code(d)
    comp = compile_sequence(d, "CH")
    prior = prior_of(NoiseModel("x", 0.05))
    cfg = MpConfig(eps=0.15)
    bad = []
    for support in _all_errors(code.n, (d - 1) // 2):
        e = PauliConfig.from_support(code.n, x_support=support)
        out = decode(code, comp, syndrome(code, e), prior, cfg)
        if not out.converged or classify_residual(code, out.estimate ^ e) is not ResidualClass.STABILIZER:
            bad.append(support)
    assert bad == []


@pytest.mark.parametrize("d", [3, 5])
def test_depolarizing_single_errors(d):
    code = build_surface_code(d)
    comp = compile_sequence(d, "DV")
    prior = prior_of(NoiseModel("depolarizing", 0.05))
    for q, (x, z) in itertools.product(range(code.n), [(1, 0), (0, 1), (1, 1)]):
        e = PauliConfig.from_support(code.n, x_support=[q] if x else [], z_support=[q] if z else [])
        out = decode(code, comp, syndrome(code, e), prior, MpConfig())
        assert out.converged
        assert classify_residual(code, out.estimate ^ e) is ResidualClass.STABILIZER


@pytest.mark.slow
def test_d17_low_rate_always_converges():
    from dilutedmp.harness import SweepSpec, run_point

    row = run_point(SweepSpec((17,), (0.01,), noise="depolarizing", eps=0.15, trials=10_000), 17, 0.01)
    assert row.nonconv == 0
