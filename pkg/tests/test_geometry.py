import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dilutedmp.geometry import (
    Family,
    GeometryError,
    SparsificationPattern,
    build_surface_code,
    dilution_sequence,
    export_graph,
    lattice_girth,
    num_stages,
    read_edge_list,
    sparsify,
)
from dilutedmp.oracle import verify_prop1


@pytest.mark.parametrize("d", [2, 3, 4, 5, 8, 9])
def test_code_shape_and_commutation(d):
    code = build_surface_code(d)
    assert code.n == d * d + (d - 1) ** 2
    assert code.hx.shape == (d * (d - 1), code.n)
    assert code.hz.shape == (d * (d - 1), code.n)
    assert not ((code.hx.astype(int) @ code.hz.T.astype(int)) % 2).any()
    # every qubit has at most two checks of each type
    assert code.hx.sum(axis=0).max() <= 2 and code.hz.sum(axis=0).max() <= 2


@pytest.mark.parametrize("d", [3, 5, 6])
def test_logicals(d):
    code = build_surface_code(d)
    lx, lz = list(code.logical_x), list(code.logical_z)
    assert len(lx) == len(lz) == d
    assert not (code.hz[:, lx].sum(axis=1) % 2).any()
    assert not (code.hx[:, lz].sum(axis=1) % 2).any()
    assert len(set(lx) & set(lz)) == 1


def test_indexing_row_major():
    code = build_surface_code(3)
    assert code.qubits[:3] == (("h", 0, 0), ("h", 0, 1), ("h", 0, 2))
    assert code.qubits[9] == ("v", 0, 0)
    assert code.h_index(2, 1) == 7 and code.v_index(1, 1) == 12


def test_invalid_inputs():
    with pytest.raises(GeometryError):
        build_surface_code(1)
    with pytest.raises(GeometryError):
        sparsify(build_surface_code(5), SparsificationPattern("DV", 5))
    with pytest.raises(GeometryError):
        SparsificationPattern("XX", 1)


def test_s_zero_is_identity():
    code = build_surface_code(7)
    for fam in Family:
        g = sparsify(code, SparsificationPattern(fam, 0))
        assert g.active.all()
        assert g.girth == 4


def test_ch_rows_kept():
    code = build_surface_code(5)
    g = sparsify(code, SparsificationPattern("CH", 1))
    kept = sorted({r for q, (o, r, c) in enumerate(code.qubits) if o == "h" and g.active[q]})
    assert kept == [0, 2, 4]
    assert all(g.active[q] for q, (o, _, _) in enumerate(code.qubits) if o == "v")


def test_dv_strips_only_vertical():
    code = build_surface_code(9)
    g = sparsify(code, SparsificationPattern("DV", 3))
    for q, (o, r, c) in enumerate(code.qubits):
        if o == "h":
            assert g.active[q]
        else:
            assert g.active[q] == ((r + c + 1) % 4 == 0)


def test_every_check_is_kept():
    code = build_surface_code(9)
    for fam in Family:
        g = sparsify(code, SparsificationPattern(fam, 7))
        assert len(g.z_neighbors) == code.num_z_checks
        assert len(g.x_neighbors) == code.num_x_checks


@pytest.mark.parametrize("d", [3, 5, 9, 16, 17])
@pytest.mark.parametrize("family", list(Family))
def test_girth_is_2s_plus_4(d, family):
    code = build_surface_code(d)
    for s in range(1, min(7, d - 1) + 1):
        g = sparsify(code, SparsificationPattern(family, s))
        # Cartesian patterns only dilute the Z-lattice; diagonal ones dilute both.
        types = ("Z", "X") if family.diagonal else ("Z",)
        for t in types:
            girth = lattice_girth(g, t)
            assert girth in (-1, 2 * s + 4), (d, family, s, t, girth)


@pytest.mark.parametrize("d", [9, 17])
def test_cartesian_leaves_other_lattice_undiluted(d):
    g = sparsify(build_surface_code(d), SparsificationPattern("CH", 3))
    assert lattice_girth(g, "X") == 4


@pytest.mark.parametrize("d", range(3, 18))
@pytest.mark.parametrize("family", [Family.DV, Family.DH])
def test_prop1_reflection(d, family):
    code = build_surface_code(d)
    for s in (1, 3, 7):
        if s >= d:
            continue
        res = verify_prop1(code, s, family)
        assert res.valid, res.reason


def test_prop1_rejects_cartesian():
    with pytest.raises(GeometryError):
        verify_prop1(build_surface_code(5), 1, "CH")


@pytest.mark.parametrize("d,K", [(2, 0), (3, 1), (4, 1), (5, 2), (9, 3), (17, 4), (33, 5), (65, 6)])
def test_num_stages(d, K):
    assert num_stages(d) == K
    seq = dilution_sequence(build_surface_code(d), "DV")
    assert seq.ratios == tuple(2**k - 1 for k in range(K + 1))
    assert seq[0].active.all()


@settings(max_examples=25)
@given(st.integers(2, 65), st.sampled_from(list(Family)))
def test_nesting(d, family):
    seq = dilution_sequence(build_surface_code(d), family)
    for a, b in zip(seq, list(seq)[1:]):
        assert not (b.active & ~a.active).any()
        assert b.n_active < a.n_active


@pytest.mark.parametrize("fmt", ["edge-list", "dot"])
def test_export_deterministic(fmt):
    a = export_graph(sparsify(build_surface_code(7), SparsificationPattern("DH", 2)), fmt)
    b = export_graph(sparsify(build_surface_code(7), SparsificationPattern("DH", 2)), fmt)
    assert a == b


def test_edge_list_round_trip():
    g = sparsify(build_surface_code(7), SparsificationPattern("CV", 3))
    text = export_graph(g, "edge-list")
    for line in text.splitlines():
        if not line.startswith("#"):
            kind, a, q = line.split()
            assert kind in ("X", "Z") and int(a) >= 0 and int(q) >= 0
    h = read_edge_list(text)
    assert np.array_equal(h.active, g.active)
    assert h.z_neighbors == g.z_neighbors and h.x_neighbors == g.x_neighbors
