import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from dilutedmp.strip import (
    BLOCK_CSV_HEADER,
    Strip,
    block_experiment,
    dilution_map_step,
    renormalize,
    stage_schedule,
    strip_decode,
    write_block_csv,
)


def test_layout():
    s = Strip(8, 3)
    assert s.n == 24 and s.num_checks == 16
    assert s.rail("L", 9) == 1 and s.rail("R", 0) == 8 and s.rung(3) == 19
    assert s.H.sum(axis=0).tolist() == [2] * 24
    assert (s.H.sum(axis=1) == 3).all()
    assert s.active(0).all()
    assert np.flatnonzero(~s.active(2)).tolist() == [16 + r for r in range(8) if r % 4]
    assert s.removed(1).tolist() == [18, 22]


def test_invalid_strip():
    with pytest.raises(ValueError):
        Strip(12, 3)
    with pytest.raises(ValueError):
        Strip(1, 0)


@pytest.mark.parametrize("k,want", [(0, 1), (1, 2), (3, 8), (7, 128), (8, 180), (10, 220)])
def test_stage_schedule(k, want):
    assert stage_schedule(k) == want


@pytest.mark.parametrize("d,K", [(8, 3), (16, 4), (32, 5)])
def test_girth(d, K):
    s = Strip(d, K)
    for k in range(K + 1):
        assert s.girth(k) == min(2 ** (k + 1) + 2, d)


@pytest.mark.parametrize("K", [3, 4, 5])
def test_computation_tree_is_cycle_free(K):
    # the ring is long enough that the rail loop never caps the girth
    s = Strip(2 ** (K + 2), K)
    for k in range(K + 1):
        assert stage_schedule(k) <= 2**k < s.girth(k) / 2


def test_short_ring_caps_girth():
    s = Strip.of_length(16)
    assert s.K == 4
    assert 2**4 >= s.girth(4) / 2


# ------------------------------------------------------------- renormalization

def _brute(s, k, syn):
    act = np.flatnonzero(s.active(k))
    best = None
    for bits in itertools.product((0, 1), repeat=act.size):
        e = np.zeros(s.n, np.uint8)
        e[act] = bits
        if np.array_equal(s.syndrome(e), syn):
            w = int(sum(bits))
            best = w if best is None else min(best, w)
    return best


def _milp(s, k, syn):
    act = np.flatnonzero(s.active(k))
    m, a = s.num_checks, act.size
    A = np.hstack([s.H[:, act].astype(float), -2 * np.eye(m)])
    cost = np.concatenate([np.ones(a), np.zeros(m)])
    ub = np.concatenate([np.ones(a), np.full(m, 2)])
    res = milp(cost, constraints=LinearConstraint(A, syn, syn), integrality=np.ones(a + m), bounds=Bounds(0, ub))
    return round(res.fun)


@pytest.mark.parametrize("d,K", [(2, 1), (4, 2)])
def test_renormalize_exhaustive(d, K):
    s = Strip(d, K)
    for k in range(K + 1):
        for syn in itertools.product((0, 1), repeat=s.num_checks):
            syn = np.array(syn, dtype=np.uint8)
            if syn.sum() % 2:
                continue
            out = renormalize(s, k, syn)
            assert np.array_equal(s.syndrome(out), syn)
            assert not out[~s.active(k)].any()
            assert int(out.sum()) == _brute(s, k, syn)


@settings(max_examples=30)
@given(st.sampled_from([(8, 3), (12, 2), (16, 4), (20, 2)]), st.integers(0, 4), st.integers(0, 2**31))
def test_renormalize_matches_milp(dk, k, seed):
    d, K = dk
    k = min(k, K)
    s = Strip(d, K)
    rng = np.random.default_rng(seed)
    e = (rng.random(s.n) < 0.2).astype(np.uint8)
    syn = s.syndrome(e)
    out = renormalize(s, k, syn)
    assert np.array_equal(s.syndrome(out), syn)
    assert int(out.sum()) == _milp(s, k, syn)


def test_renormalize_rejects_odd_syndrome():
    s = Strip(4, 2)
    syn = np.zeros(8, np.uint8)
    syn[0] = 1
    with pytest.raises(ValueError):
        renormalize(s, 0, syn)


# ------------------------------------------------------------- decoding and dilution

@pytest.mark.parametrize("p", [0.01, 0.1, 0.3])
def test_strip_decode_single_errors(p):
    s = Strip.of_length(16)
    assert strip_decode(s, np.zeros(s.n, np.uint8), p).success
    for q in range(s.n):
        e = np.zeros(s.n, np.uint8)
        e[q] = 1
        out = strip_decode(s, e, p)
        assert out.success and out.converged


def test_strip_decode_logical():
    s = Strip.of_length(16)
    e = np.zeros(s.n, np.uint8)
    e[:16] = 1  # the whole left rail: zero syndrome, odd crossing
    assert not s.syndrome(e).any() and s.logical_parity(e) == 1
    out = strip_decode(s, e, 0.05)
    assert out.converged and not out.success


@given(st.integers(0, 2**31), st.integers(0, 2))
def test_dilution_step_bookkeeping(seed, k):
    s = Strip(16, 3)
    rng = np.random.default_rng(seed)
    e = ((rng.random(s.n) < 0.1) & s.active(k)).astype(np.uint8)
    step = dilution_map_step(s, k, e)
    hat = np.zeros(s.n, np.uint8)
    hat[step.removed] = step.frozen
    assert np.array_equal(s.syndrome(step.effective_error), s.syndrome(e ^ hat))
    assert not step.effective_error[~s.active(k + 1)].any()


def test_dilution_step_checks_support():
    s = Strip(8, 2)
    e = np.zeros(s.n, np.uint8)
    e[s.rung(1)] = 1
    with pytest.raises(ValueError):
        dilution_map_step(s, 1, e)
    with pytest.raises(ValueError):
        dilution_map_step(s, 2, np.zeros(s.n, np.uint8))


# ------------------------------------------------------------- block experiment

@pytest.mark.parametrize("k,n_B", [(0, 1), (0, 2), (1, 3), (2, 4)])
def test_block_non_expansion(k, n_B):
    r = block_experiment(k, n_B, 300, seed=5)
    assert r.samples == 300
    assert 0.0 <= r.mean_output <= n_B + 1


def test_block_deterministic_and_weighting():
    a = block_experiment(1, 3, 200, seed=9)
    b = block_experiment(1, 3, 200, seed=9)
    assert a == b
    c = block_experiment(1, 3, 200, 1.0, 100.0, seed=9)
    assert (c.n_correct, c.n_wrong) == (a.n_correct, a.n_wrong)
    with pytest.raises(ValueError):
        block_experiment(0, 9, 10)


def test_block_csv():
    text = write_block_csv([block_experiment(0, 1, 50), block_experiment(2, 2, 50)])
    lines = text.splitlines()
    assert lines[0].split(",") == BLOCK_CSV_HEADER
    assert len(lines) == 3 and lines[1].startswith("0,1,")


@pytest.mark.slow
def test_block_inset_point():
    r = block_experiment(3, 13, 10_000, 1.0, 100.0)
    assert abs(r.mean_output - 13.33) <= 0.15 * 13.33


@pytest.mark.slow
def test_light_errors_decode_on_long_strip():
    s = Strip.of_length(64)
    rng = np.random.default_rng(64)
    ok = 0
    for _ in range(10_000):
        e = np.zeros(s.n, np.uint8)
        e[rng.choice(s.n, rng.integers(0, 16), replace=False)] = 1
        ok += strip_decode(s, e, 0.05).success
    assert ok >= 9900
