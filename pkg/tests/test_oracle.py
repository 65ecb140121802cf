import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from dilutedmp import _backend
from dilutedmp.geometry import Family, SparsificationPattern, build_surface_code, sparsify
from dilutedmp.noise import Prior, xz_coupling
from dilutedmp.oracle import (
    cavity_discrepancy_closed_form,
    cavity_discrepancy_exact,
    diagonal_local_expansion,
    effective_error,
    error_correcting_radius,
    matching_lattice,
    min_weight_correction,
    theorem_bound,
)
from dilutedmp.pauli import PauliConfig, syndrome


@pytest.mark.parametrize("d,family,s,bound", [
    (9, "DH", 1, 2), (9, "DH", 2, 2), (9, "DH", 3, 1),
    (9, "CH", 1, 4), (9, "CH", 2, 4), (9, "CH", 3, 2),
    (7, "CH", 1, 3), (5, "DH", 0, 2), (9, "DV", 1, None),
])
def test_theorem_bound_values(d, family, s, bound):
    assert theorem_bound(d, family, s) == bound


# ------------------------------------------------------------- exact matching

def _milp_class_weight(code, active, support, cls):
    """Fewest active qubits with the syndrome of ``support`` in logical class ``cls``."""
    H = code.hz.astype(float)
    act = np.flatnonzero(active)
    s = code.hz[:, list(support)].sum(axis=1) % 2
    m, k = H.shape[0], act.size
    L = np.zeros(code.n)
    L[list(code.logical_z)] = 1
    A = np.zeros((m + 1, k + m + 1))
    A[:m, :k] = H[:, act]
    A[:m, k:k + m] = -2 * np.eye(m)
    A[m, :k] = L[act]
    A[m, -1] = -2
    b = np.concatenate([s, [cls]])
    cost = np.concatenate([np.ones(k), np.zeros(m + 1)])
    ub = np.concatenate([np.ones(k), np.full(m + 1, code.d)])
    res = milp(cost, constraints=LinearConstraint(A, b, b), integrality=np.ones(k + m + 1), bounds=Bounds(0, ub))
    return round(res.fun) if res.success else None


@settings(max_examples=25)
@given(st.sampled_from([5, 7]), st.sampled_from(list(Family)), st.integers(0, 3),
       st.lists(st.integers(0, 10**4), min_size=1, max_size=4))
def test_matching_agrees_with_milp(d, family, s, picks):
    code = build_surface_code(d)
    graph = sparsify(code, SparsificationPattern(family, s))
    lat = matching_lattice(graph, "X")
    support = sorted({p % code.n for p in picks})
    corr = min_weight_correction(lat, lat.defects_of(support))
    want = tuple(_milp_class_weight(code, graph.active, support, c) for c in (0, 1))
    got = tuple(w if w < 10**6 else None for w in corr.class_weights)
    assert got == want
    # the returned set is a genuine minimizer on the diluted lattice
    assert graph.active[list(corr.qubits)].all()
    assert lat.defects_of(corr.qubits) == lat.defects_of(support)
    assert corr.weight == min(w for w in want if w is not None)


@given(st.integers(0, 2**31), st.integers(1, 5))
def test_matching_order_independent(seed, w):
    code = build_surface_code(7)
    lat = matching_lattice(sparsify(code, SparsificationPattern("DH", 1)), "X")
    rng = np.random.default_rng(seed)
    defects = lat.defects_of(rng.choice(code.n, w, replace=False).tolist())
    a = min_weight_correction(lat, defects)
    b = min_weight_correction(lat, list(rng.permutation(defects)))
    assert a.class_weights == b.class_weights


def test_too_many_defects():
    code = build_surface_code(9)
    lat = matching_lattice(sparsify(code, SparsificationPattern("DV", 0)), "X")
    with pytest.raises(ValueError):
        min_weight_correction(lat, range(13))


@pytest.mark.parametrize("family", ["DV", "DH", "CH"])
def test_effective_error(family):
    code = build_surface_code(7)
    graph = sparsify(code, SparsificationPattern(family, 1))
    e = PauliConfig.from_support(code.n, x_support=[8, 30, 61], z_support=[17, 44])
    eff = effective_error(code, graph, e)
    assert syndrome(code, eff) == syndrome(code, e)
    assert not (eff.x[~graph.active].any() or eff.z[~graph.active].any())


# ------------------------------------------------------------- radius

@pytest.mark.parametrize("d,family,s", [
    (d, f, s) for d in (3, 5, 7) for f, s in (("DH", 1), ("DH", 2), ("DH", 3), ("CH", 1), ("CH", 3)) if s < d
])
def test_radius_meets_bound(d, family, s):
    rep = error_correcting_radius(build_surface_code(d), SparsificationPattern(family, s))
    assert rep.computed_radius >= rep.theorem_lower_bound


@pytest.mark.parametrize("d", [3, 5, 7])
def test_ch1_has_full_radius(d):
    rep = error_correcting_radius(build_surface_code(d), SparsificationPattern("CH", 1))
    assert rep.computed_radius == (d - 1) // 2


def test_ch2_tie_at_d5():
    # weight-2 errors with equal-weight classes exist; scoring ties as corrected lifts the radius
    code = build_surface_code(5)
    strict = error_correcting_radius(code, SparsificationPattern("CH", 2))
    lenient = error_correcting_radius(code, SparsificationPattern("CH", 2), ties="favorable")
    assert (strict.computed_radius, lenient.computed_radius) == (1, 2)
    assert strict.exact and strict.witnesses
    with pytest.raises(ValueError):
        error_correcting_radius(code, SparsificationPattern("CH", 2), ties="coin")


@pytest.mark.skipif(_backend.compiled is None, reason="compiled kernels not built")
@pytest.mark.parametrize("family,s,w", [("CH", 2, 2), ("DH", 1, 3), ("DV", 3, 2)])
@pytest.mark.parametrize("ties_ok", [False, True])
def test_scan_backends_agree(family, s, w, ties_ok):
    code = build_surface_code(5)
    lat = matching_lattice(sparsify(code, SparsificationPattern(family, s)), "X")
    e0, e1 = lat.endpoint_arrays()
    args = (e0, e1, lat.in_logical, lat.dist, lat.dA, lat.dB, w, 0, code.n, 50, ties_ok)
    assert _backend.get("python").radius_scan(*args) == _backend.get("cython").radius_scan(*args)


def test_report_text():
    rep = error_correcting_radius(build_surface_code(3), SparsificationPattern("CH", 1))
    keys = [line.split(":")[0] for line in rep.to_text().splitlines()]
    assert keys == ["d", "pattern", "s", "computed_radius", "theorem_lower_bound", "exact",
                    "exhaustive_to", "checked", "witnesses"]


@pytest.mark.parametrize("s", [1, 2, 3])
def test_diagonal_local_expansion(s):
    assert diagonal_local_expansion(s, "DH") == 2 * ((s + 1) // 2)


# ------------------------------------------------------------- cavity discrepancy

def test_cavity_random_priors():
    rng = np.random.default_rng(7)
    for w in rng.dirichlet(np.ones(4), size=100):
        pr = Prior(*w)
        for sigma in (0, 1):
            diff = cavity_discrepancy_exact(pr, sigma) - cavity_discrepancy_closed_form(pr, sigma)
            assert abs(diff) <= 1e-12


@pytest.mark.parametrize("px,pz", [(0.25, 0.5), (0.125, 0.25), (0.5, 0.0625)])
def test_cavity_zero_when_uncoupled(px, pz):
    pr = Prior.from_table(np.outer([1 - px, px], [1 - pz, pz]))
    assert xz_coupling(pr) == 0.0
    for sigma in (0, 1):
        assert cavity_discrepancy_exact(pr, sigma) == 0.0
        assert cavity_discrepancy_closed_form(pr, sigma) == 0.0


def test_cavity_impossible_condition():
    with pytest.raises(ValueError):
        cavity_discrepancy_exact(Prior(0.9, 0.1, 0.0, 0.0), 1)
