"""Exact reference computations used to validate the decoder and the geometry.

* minimum-weight corrections on (diluted) component lattices, by exhaustive
  pairing of at most 12 defects over shortest-path distances;
* effective errors and exhaustive error-correcting radii;
* the two-qubit cavity discrepancy by enumeration, next to its closed form;
* the transpose isomorphism between diluted X- and Z-lattices.

Everything here works one component lattice at a time.  X errors are seen by
the Z-lattice and are logical when they overlap ``logical_z`` oddly; Z errors
are seen by the X-lattice with ``logical_x`` playing the same role.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from . import _backend
from ._pykernels import INF_DIST, match_dp
from .geometry import (
    DilutedGraph,
    Family,
    GeometryError,
    SparsificationPattern,
    SurfaceCode,
    build_surface_code,
    component_lattices,
    sparsify,
)
from .noise import Prior, xz_coupling
from .pauli import PauliConfig

__all__ = [
    "MAX_DEFECTS",
    "UnsatisfiableError",
    "MatchingLattice",
    "Correction",
    "RadiusReport",
    "Prop1Result",
    "matching_lattice",
    "min_weight_correction",
    "effective_error",
    "theorem_bound",
    "error_correcting_radius",
    "cavity_discrepancy_exact",
    "cavity_discrepancy_closed_form",
    "verify_prop1",
    "diagonal_local_expansion",
]

MAX_DEFECTS = 12


class UnsatisfiableError(ValueError):
    """The defect set cannot be produced by any configuration on the lattice."""


@dataclass(frozen=True, eq=False)
class MatchingLattice:
    """A component lattice prepared for exact matching.

    ``ends`` lists each qubit's check endpoints on the *full* lattice (used to
    compute syndromes of arbitrary errors); ``active`` marks the qubits the
    correction may use.  Boundary A is the set of active dangling edges in
    the conjugate logical, boundary B the remaining active dangling edges.
    """

    check_type: str
    nvert: int
    ends: tuple[tuple[int, ...], ...] = field(repr=False)
    active: np.ndarray = field(repr=False)
    in_logical: np.ndarray = field(repr=False)
    dist: np.ndarray = field(repr=False)
    pred: np.ndarray = field(repr=False)
    dA: np.ndarray = field(repr=False)
    dB: np.ndarray = field(repr=False)
    nearA: np.ndarray = field(repr=False)  # (vertex of the dangling edge, qubit) or -1
    nearB: np.ndarray = field(repr=False)
    edge_of: dict = field(repr=False)

    def defects_of(self, support: Iterable[int]) -> list[int]:
        par: dict[int, int] = {}
        for q in support:
            for v in self.ends[q]:
                par[v] = par.get(v, 0) ^ 1
        return sorted(v for v, b in par.items() if b)

    def logical_class(self, support: Iterable[int]) -> int:
        return int(sum(int(self.in_logical[q]) for q in support)) & 1

    def endpoint_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        e0 = np.full(len(self.ends), -1, dtype=np.int32)
        e1 = np.full(len(self.ends), -1, dtype=np.int32)
        for q, ends in enumerate(self.ends):
            if ends:
                e0[q] = ends[0]
            if len(ends) > 1:
                e1[q] = ends[1]
        return e0, e1


def matching_lattice(graph: DilutedGraph, error_type: str = "X") -> MatchingLattice:
    """Lattice seeing ``error_type`` errors, restricted to ``graph``'s active qubits."""
    code = graph.code
    error_type = error_type.upper()
    if error_type == "X":
        checks, logical, ctype = code.z_checks, code.logical_z, "Z"
    elif error_type == "Z":
        checks, logical, ctype = code.x_checks, code.logical_x, "X"
    else:
        raise ValueError(f"error type must be 'X' or 'Z', got {error_type!r}")
    nvert = len(checks)
    ends: list[list[int]] = [[] for _ in range(code.n)]
    for a, nb in enumerate(checks):
        for q in nb:
            ends[q].append(a)
    active = np.asarray(graph.active, dtype=bool)
    in_log = np.zeros(code.n, dtype=np.uint8)
    in_log[list(logical)] = 1

    rows, cols, edge_of = [], [], {}
    for q in np.flatnonzero(active):
        if len(ends[q]) == 2:
            a, b = ends[q]
            rows += [a, b]
            cols += [b, a]
            edge_of[(a, b)] = edge_of[(b, a)] = int(q)
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nvert, nvert)).tocsr()
    d, pred = shortest_path(adj, directed=False, unweighted=True, return_predecessors=True)
    dist = np.where(np.isinf(d), INF_DIST, d).astype(np.int32)

    def boundary(select):
        best = np.full(nvert, INF_DIST, dtype=np.int32)
        near = np.full((nvert, 2), -1, dtype=np.int64)
        for q in np.flatnonzero(active):
            if len(ends[q]) == 1 and select(q):
                u = ends[q][0]
                cand = dist[:, u] + 1
                better = (dist[:, u] < INF_DIST) & (cand < best)
                best[better] = cand[better]
                near[better] = (u, q)
        return best, near

    dA, nearA = boundary(lambda q: in_log[q] == 1)
    dB, nearB = boundary(lambda q: in_log[q] == 0)
    return MatchingLattice(
        ctype, nvert, tuple(tuple(e) for e in ends), active, in_log, dist, pred, dA, dB, nearA, nearB, edge_of
    )


@dataclass(frozen=True)
class Correction:
    qubits: frozenset
    weight: int
    parity: int
    class_weights: tuple[int, int]


def _path(lat: MatchingLattice, u: int, v: int) -> list[int]:
    out = []
    while v != u:
        p = int(lat.pred[u, v])
        out.append(lat.edge_of[(p, v)])
        v = p
    return out


def _solve(lat: MatchingLattice, defects: Sequence[int], want_parity: int | None):
    """DP with backtracking; returns (weights, qubit set of the chosen class)."""
    k = len(defects)
    full = (1 << k) - 1
    f = [[INF_DIST, INF_DIST] for _ in range(full + 1)]
    how: list[list[tuple | None]] = [[None, None] for _ in range(full + 1)]
    f[0][0] = 0
    for mask in range(full):
        i = 0
        while (mask >> i) & 1:
            i += 1
        vi = defects[i]
        m2 = mask | (1 << i)
        for par in (0, 1):
            cur = f[mask][par]
            if cur >= INF_DIST:
                continue
            for tgt_par, cost, tag in ((par ^ 1, lat.dA[vi], "A"), (par, lat.dB[vi], "B")):
                c = cur + int(cost)
                if c < f[m2][tgt_par]:
                    f[m2][tgt_par] = c
                    how[m2][tgt_par] = (mask, par, tag, i, -1)
            for j in range(i + 1, k):
                if (mask >> j) & 1:
                    continue
                m3 = m2 | (1 << j)
                c = cur + int(lat.dist[vi, defects[j]])
                if c < f[m3][par]:
                    f[m3][par] = c
                    how[m3][par] = (mask, par, "P", i, j)
    weights = (f[full][0], f[full][1])
    if want_parity is None:
        want_parity = 0 if weights[0] <= weights[1] else 1
    if weights[want_parity] >= INF_DIST:
        return weights, None, want_parity
    qubits: set[int] = set()
    mask, par = full, want_parity
    while mask:
        prev, ppar, tag, i, j = how[mask][par]
        vi = defects[i]
        if tag == "P":
            path = _path(lat, vi, defects[j])
        else:
            near = lat.nearA if tag == "A" else lat.nearB
            u, q = (int(x) for x in near[vi])
            path = _path(lat, vi, u) + [q]
        qubits.symmetric_difference_update(path)
        mask, par = prev, ppar
    return weights, frozenset(qubits), want_parity


def min_weight_correction(lat: MatchingLattice, defects: Iterable[int], parity: int | None = None) -> Correction:
    """Exact minimum-weight qubit set on ``lat`` whose boundary is ``defects``.

    With ``parity`` given, the minimum is taken inside that logical class.

    Raises:
        UnsatisfiableError: if no configuration on the lattice has this syndrome.
        ValueError: if there are more than ``MAX_DEFECTS`` defects.
    """
    defects = sorted(set(int(v) for v in defects))
    if len(defects) > MAX_DEFECTS:
        raise ValueError(f"{len(defects)} defects exceed the exhaustive limit of {MAX_DEFECTS}")
    weights, qubits, par = _solve(lat, defects, parity)
    if qubits is None:
        raise UnsatisfiableError(f"defects {defects} cannot be matched on this lattice")
    return Correction(qubits, len(qubits), par, (int(weights[0]), int(weights[1])))


def effective_error(code: SurfaceCode, graph: DilutedGraph, e: PauliConfig) -> PauliConfig:
    """Minimum-weight configuration on ``graph`` with the syndrome of ``e`` (per component)."""
    if len(e) != code.n:
        raise ValueError("configuration length does not match the code")
    x = np.zeros(code.n, np.uint8)
    z = np.zeros(code.n, np.uint8)
    if e.x.any():
        lat = matching_lattice(graph, "X")
        corr = min_weight_correction(lat, lat.defects_of(np.flatnonzero(e.x)))
        x[list(corr.qubits)] = 1
    if e.z.any():
        lat = matching_lattice(graph, "Z")
        corr = min_weight_correction(lat, lat.defects_of(np.flatnonzero(e.z)))
        z[list(corr.qubits)] = 1
    return PauliConfig(x, z)


def theorem_bound(d: int, family: "Family | str", s: int) -> int | None:
    """Lower bound on the X-error radius for the H-type patterns (``None`` otherwise)."""
    family = Family.parse(family)
    if s == 0:
        return (d - 1) // 2
    if family is Family.DH:
        return (d - 1) // (2 * ((s + 1) // 2) + 2)
    if family is Family.CH:
        return (d - 1) // ((s - 1) // 2 + 2)
    return None


@dataclass(frozen=True)
class RadiusReport:
    """Outcome of an exhaustive radius scan.

    ``computed_radius`` is exact when ``exact`` is set (a failing error of
    weight ``computed_radius + 1`` was found); otherwise every error up to
    ``exhaustive_to`` is corrected and the radius is at least that.
    """

    d: int
    pattern: str
    s: int
    computed_radius: int
    theorem_lower_bound: int | None
    witnesses: tuple[tuple[int, ...], ...]
    exhaustive_to: int
    exact: bool
    checked: int

    def to_text(self) -> str:
        items = [
            ("d", self.d),
            ("pattern", self.pattern),
            ("s", self.s),
            ("computed_radius", self.computed_radius),
            ("theorem_lower_bound", self.theorem_lower_bound),
            ("exact", str(self.exact).lower()),
            ("exhaustive_to", self.exhaustive_to),
            ("checked", self.checked),
            ("witnesses", [list(w) for w in self.witnesses]),
        ]
        return "\n".join(f"{k}: {v}" for k, v in items)


def _scan(lat: MatchingLattice, weight: int, backend, chunks: int = 1, max_witnesses: int = 4, ties_ok=False):
    e0, e1 = lat.endpoint_arrays()
    n = e0.shape[0]
    kern = backend or _backend.kernels
    edges = np.linspace(0, n, chunks + 1).astype(int)
    checked = failures = 0
    wits: list[tuple[int, ...]] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        c, f, w = kern.radius_scan(
            e0, e1, lat.in_logical, lat.dist, lat.dA, lat.dB, int(weight), int(lo), int(hi), max_witnesses, bool(ties_ok)
        )
        checked += int(c)
        failures += int(f)
        wits.extend(tuple(int(q) for q in x) for x in w)
    return checked, failures, wits[:max_witnesses]


def _fails(lat: MatchingLattice, support: Sequence[int], ties_ok: bool = False) -> bool:
    defects = lat.defects_of(support)
    if len(defects) > MAX_DEFECTS:
        return False
    w0, w1 = match_dp(defects, lat.dist, lat.dA, lat.dB)
    own, other = (w0, w1) if lat.logical_class(support) == 0 else (w1, w0)
    return own >= INF_DIST or own > other or (own == other and not ties_ok)


def _targeted_witness(code: SurfaceCode, lat: MatchingLattice, weight: int, ties_ok: bool = False):
    """Search straight strings of ``weight`` qubits for a failing error."""
    d = code.d
    cands = []
    for r in range(d):
        for c0 in range(d - weight + 1):
            cands.append([code.h_index(r, c) for c in range(c0, c0 + weight)])
    for c in range(d):
        for r0 in range(d - weight + 1):
            cands.append([code.h_index(r, c) for r in range(r0, r0 + weight)])
    for cand in cands:
        if _fails(lat, cand, ties_ok):
            return tuple(cand)
    return None


def error_correcting_radius(
    code: SurfaceCode,
    pattern: "SparsificationPattern | DilutedGraph",
    max_weight: int | None = None,
    backend=None,
    chunks: int = 1,
    error_type: str = "X",
    ties: str = "fail",
) -> RadiusReport:
    """Exhaustive error-correcting radius of one diluted component lattice.

    Errors of weight 1, 2, ... up to ``max_weight`` (default
    ``floor((d-1)/2)``, at most 4 beyond d = 7) are all checked.  If none
    fails, straight strings one longer are tried as witnesses.

    ``ties`` decides errors whose two logical classes have equal minimum
    weight: ``"fail"`` (default) counts them as uncorrected, since some
    minimum-weight decoder returns the wrong class; ``"favorable"`` counts
    them as corrected.
    """
    if ties not in ("fail", "favorable"):
        raise ValueError(f"ties must be 'fail' or 'favorable', got {ties!r}")
    ties_ok = ties == "favorable"
    graph = pattern if isinstance(pattern, DilutedGraph) else sparsify(code, pattern)
    lat = matching_lattice(graph, error_type)
    half = (code.d - 1) // 2
    cap = half if max_weight is None else int(max_weight)
    if max_weight is None and code.d > 7:
        cap = min(cap, 4)
    bound = theorem_bound(code.d, graph.family, graph.s)
    checked = 0
    for w in range(1, cap + 1):
        c, f, wits = _scan(lat, w, backend, chunks, ties_ok=ties_ok)
        checked += c
        if f:
            return RadiusReport(code.d, graph.family.value, graph.s, w - 1, bound, tuple(wits), w, True, checked)
    wit = _targeted_witness(code, lat, cap + 1, ties_ok)
    return RadiusReport(
        code.d, graph.family.value, graph.s, cap, bound, (wit,) if wit else (), cap, wit is not None, checked
    )


def _check_prior(prior: Prior):
    psi = prior.table()
    return [(x, z, psi[x, z]) for x in (0, 1) for z in (0, 1)]


def cavity_discrepancy_exact(prior: Prior, sigma: int) -> float:
    """Total-variation distance between P(X_i, X_j | Z_i + Z_j = sigma) and the product of its marginals.

    Enumerates the 16 joint outcomes of two i.i.d. qubits.

    Raises:
        ValueError: if the conditioning event has probability zero.
    """
    sigma = int(sigma) & 1
    joint = np.zeros((2, 2))
    for (xi, zi, pi), (xj, zj, pj) in itertools.product(_check_prior(prior), repeat=2):
        if (zi ^ zj) == sigma:
            joint[xi, xj] += pi * pj
    total = joint.sum()
    if total <= 0.0:
        raise ValueError(f"conditioning event Z_i + Z_j = {sigma} has probability zero")
    joint /= total
    product = np.outer(joint.sum(axis=1), joint.sum(axis=0))
    return float(0.5 * np.abs(joint - product).sum())


def cavity_discrepancy_closed_form(prior: Prior, sigma: int) -> float:
    kappa = xz_coupling(prior)
    pz = prior.p_z_marginal
    if int(sigma) & 1:
        denom = (2.0 * pz * (1.0 - pz)) ** 2
    else:
        denom = ((1.0 - pz) ** 2 + pz**2) ** 2
    if denom == 0.0:
        raise ValueError("conditioning event has probability zero")
    return 2.0 * kappa**2 / denom


@dataclass(frozen=True)
class Prop1Result:
    valid: bool
    qubit_map: dict
    check_map: dict
    reason: str = ""


def verify_prop1(code: SurfaceCode, s: int, family: "Family | str" = Family.DV) -> Prop1Result:
    """Check that the transpose maps the diluted X-lattice onto the diluted Z-lattice.

    The map sends ``h(r, c) -> h(c, r)``, ``v(r, c) -> v(c, r)`` and X-check
    ``(r, c)`` to Z-check ``(c, r)``.

    Raises:
        GeometryError: for Cartesian patterns, which do not commute with the reflection.
    """
    family = Family.parse(family)
    if not family.diagonal:
        raise GeometryError(f"the reflection argument does not apply to the {family.value} pattern")
    graph = sparsify(code, SparsificationPattern(family, s))
    d = code.d
    qmap = {}
    for q, (o, r, c) in enumerate(code.qubits):
        qmap[q] = code.h_index(c, r) if o == "h" else code.v_index(c, r)
    cmap = {code.x_check_index(r, c): code.z_check_index(c, r) for r in range(d - 1) for c in range(d)}
    if sorted(qmap.values()) != list(range(code.n)):
        return Prop1Result(False, qmap, cmap, "qubit map is not a bijection")
    if sorted(cmap.values()) != list(range(code.num_z_checks)):
        return Prop1Result(False, qmap, cmap, "check map is not a bijection")
    act = graph.active
    for q in range(code.n):
        if bool(act[q]) != bool(act[qmap[q]]):
            return Prop1Result(False, qmap, cmap, f"qubit {q} and its image differ in retention")
    for a, nb in enumerate(graph.x_neighbors):
        image = sorted(qmap[q] for q in nb)
        if image != sorted(graph.z_neighbors[cmap[a]]):
            return Prop1Result(False, qmap, cmap, f"X-check {a} is not mapped onto its image")
    return Prop1Result(True, qmap, cmap)


def diagonal_local_expansion(s: int, family: "Family | str" = Family.DH, margin: int | None = None) -> int:
    """Largest number of retained cross-edges in the effective error of a single removed qubit.

    Single X errors are placed on every removed qubit far from the lattice
    boundary; for each, the effective error on the diluted Z-lattice is
    computed and the edges of the orientation opposite to the removed one are
    counted.  The maximum is the local expansion factor of the pattern.
    """
    family = Family.parse(family)
    if not family.diagonal:
        raise GeometryError("local expansion is defined here for diagonal patterns only")
    margin = (s + 2) if margin is None else margin
    d = 2 * margin + 2 * (s + 1) + 1
    code = build_surface_code(d)
    graph = sparsify(code, SparsificationPattern(family, s))
    lat = matching_lattice(graph, "X")
    removed = "v" if family is Family.DV else "h"
    other = "h" if removed == "v" else "v"
    best = 0
    for q, (o, r, c) in enumerate(code.qubits):
        if o != removed or graph.active[q]:
            continue
        if not (margin <= r < d - margin and margin <= c < d - margin):
            continue
        corr = min_weight_correction(lat, lat.defects_of([q]))
        count = sum(1 for u in corr.qubits if code.qubits[u][0] == other)
        best = max(best, count)
    return best
