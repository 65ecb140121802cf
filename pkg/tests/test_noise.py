import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from dilutedmp.noise import NoiseKind, NoiseModel, Prior, prior_of, sample, trial_rng, xz_coupling


@pytest.mark.parametrize("kind", list(NoiseKind))
@pytest.mark.parametrize("p", [0.0, 0.01, 0.3, 1.0])
def test_prior_normalized(kind, p):
    pr = prior_of(NoiseModel(kind, p))
    assert abs(pr.p_I + pr.p_X + pr.p_Y + pr.p_Z - 1.0) <= 1e-12
    assert min(pr.p_I, pr.p_X, pr.p_Y, pr.p_Z) >= 0


def test_prior_values():
    dep = prior_of(NoiseModel("depolarizing", 0.3))
    assert dep.p_X == dep.p_Y == dep.p_Z == pytest.approx(0.1)
    assert prior_of(NoiseModel("x", 0.2)) == Prior(0.8, 0.2, 0.0, 0.0)


def test_invalid_rate():
    for p in (-0.1, 1.5, float("nan")):
        with pytest.raises(ValueError):
            NoiseModel("x", p)
    with pytest.raises(ValueError):
        Prior(0.5, 0.5, 0.1, 0.0)
    with pytest.raises(ValueError):
        NoiseKind.parse("bitflip-ish")


def test_coupling_examples():
    assert xz_coupling(prior_of(NoiseModel("depolarizing", 0.3))) == pytest.approx(0.1 - 0.04, abs=1e-15)
    assert xz_coupling(prior_of(NoiseModel("x", 0.3))) == 0.0


@given(st.lists(st.floats(0.001, 1.0), min_size=4, max_size=4))
def test_coupling_is_covariance(w):
    w = np.array(w) / sum(w)
    pr = Prior(*w)
    psi = pr.table()
    ex = sum(x * psi[x, z] for x, z in itertools.product((0, 1), repeat=2))
    ez = sum(z * psi[x, z] for x, z in itertools.product((0, 1), repeat=2))
    exz = sum(x * z * psi[x, z] for x, z in itertools.product((0, 1), repeat=2))
    assert abs(xz_coupling(pr) - (exz - ex * ez)) <= 1e-12


def test_sampler_deterministic():
    m = NoiseModel("depolarizing", 0.1)
    assert sample(m, 500, trial_rng(3, 5, 7)) == sample(m, 500, trial_rng(3, 5, 7))
    assert sample(m, 500, trial_rng(3, 5, 7)) != sample(m, 500, trial_rng(3, 5, 8))
    assert sample(m, 100, 11) == sample(m, 100, 11)


@pytest.mark.parametrize("kind,p", [("depolarizing", 0.1), ("depolarizing", 0.3), ("x", 0.2)])
def test_sampler_chi_square(kind, p):
    m = NoiseModel(kind, p)
    n = 10**6
    e = sample(m, n, trial_rng(2026, 0))
    counts = np.bincount(e.x + 2 * e.z, minlength=4)  # I, X, Z, Y
    pr = prior_of(m)
    expected = np.array([pr.p_I, pr.p_X, pr.p_Z, pr.p_Y]) * n
    keep = expected > 0
    assert counts[~keep].sum() == 0
    _, pval = chisquare(counts[keep], expected[keep])
    assert pval > 1e-4
