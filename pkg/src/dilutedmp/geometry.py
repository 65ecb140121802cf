"""Planar surface-code geometry, sparsification patterns and dilution sequences.

Qubits live on the edges of the Z-check lattice.  Z-checks are the vertices
``(r, c)`` with ``0 <= r < d`` and ``0 <= c < d - 1``; X-checks are the faces
``(r, c)`` with ``0 <= r < d - 1`` and ``0 <= c < d``.  Horizontal edge
``h(r, c)`` joins vertices ``(r, c-1)`` and ``(r, c)`` (the ``c = 0`` and
``c = d - 1`` edges dangle onto the left and right boundary); vertical edge
``v(r, c)`` joins ``(r, c)`` and ``(r+1, c)``.

Orientation words ("horizontal", "vertical", "row", "column") always refer to
this Z-lattice embedding.  In the X-lattice the same qubit is drawn rotated by
90 degrees, which is why the transpose ``(r, c) -> (c, r)`` maps one lattice
onto the other.
"""

from __future__ import annotations

import enum
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "GeometryError",
    "Family",
    "SurfaceCode",
    "SparsificationPattern",
    "DilutedGraph",
    "DilutionSequence",
    "Lattice",
    "build_surface_code",
    "sparsify",
    "dilution_sequence",
    "num_stages",
    "component_lattices",
    "lattice_girth",
    "export_graph",
    "read_edge_list",
]


class GeometryError(ValueError):
    """Invalid distance, ratio or serialization request."""


class Family(str, enum.Enum):
    DV = "DV"
    DH = "DH"
    CV = "CV"
    CH = "CH"

    @property
    def diagonal(self) -> bool:
        return self in (Family.DV, Family.DH)

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise GeometryError(f"unknown sparsification family {value!r}") from None


@dataclass(frozen=True, eq=False)
class SurfaceCode:
    d: int
    n: int
    qubits: tuple[tuple[str, int, int], ...]
    x_checks: tuple[tuple[int, ...], ...]
    z_checks: tuple[tuple[int, ...], ...]
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]
    hx: np.ndarray = field(repr=False)
    hz: np.ndarray = field(repr=False)

    def h_index(self, r: int, c: int) -> int:
        return r * self.d + c

    def v_index(self, r: int, c: int) -> int:
        return self.d * self.d + r * (self.d - 1) + c

    def z_check_index(self, r: int, c: int) -> int:
        return r * (self.d - 1) + c

    def x_check_index(self, r: int, c: int) -> int:
        return r * self.d + c

    @property
    def num_x_checks(self) -> int:
        return len(self.x_checks)

    @property
    def num_z_checks(self) -> int:
        return len(self.z_checks)


def build_surface_code(d: int) -> SurfaceCode:
    """Distance-``d`` planar surface code with ``d**2 + (d-1)**2`` qubits."""
    if int(d) != d or d < 2:
        raise GeometryError(f"invalid distance {d!r}: need an integer d >= 2")
    d = int(d)
    qubits = [("h", r, c) for r in range(d) for c in range(d)]
    qubits += [("v", r, c) for r in range(d - 1) for c in range(d - 1)]
    n = len(qubits)

    def h(r, c):
        return r * d + c

    def v(r, c):
        return d * d + r * (d - 1) + c

    z_checks = []
    for r in range(d):
        for c in range(d - 1):
            nb = [h(r, c), h(r, c + 1)]
            if r > 0:
                nb.append(v(r - 1, c))
            if r < d - 1:
                nb.append(v(r, c))
            z_checks.append(tuple(sorted(nb)))
    x_checks = []
    for r in range(d - 1):
        for c in range(d):
            nb = [h(r, c), h(r + 1, c)]
            if c > 0:
                nb.append(v(r, c - 1))
            if c < d - 1:
                nb.append(v(r, c))
            x_checks.append(tuple(sorted(nb)))

    hx = np.zeros((len(x_checks), n), dtype=np.uint8)
    for a, nb in enumerate(x_checks):
        hx[a, list(nb)] = 1
    hz = np.zeros((len(z_checks), n), dtype=np.uint8)
    for a, nb in enumerate(z_checks):
        hz[a, list(nb)] = 1
    # Row 0 runs along the top rough boundary of the X-lattice; column 0 along
    # the left rough boundary of the Z-lattice.
    logical_x = tuple(h(0, c) for c in range(d))
    logical_z = tuple(h(r, 0) for r in range(d))
    return SurfaceCode(
        d=d,
        n=n,
        qubits=tuple(qubits),
        x_checks=tuple(x_checks),
        z_checks=tuple(z_checks),
        logical_x=logical_x,
        logical_z=logical_z,
        hx=hx,
        hz=hz,
    )


@dataclass(frozen=True)
class SparsificationPattern:
    family: Family
    s: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if int(self.s) != self.s or self.s < 0:
            raise GeometryError(f"invalid sparsification ratio {self.s!r}")


def diagonal_index(orient: str, r: int, c: int) -> int:
    """Index of the diagonal line through a qubit (row + column of its midpoint)."""
    return r + c if orient == "h" else r + c + 1


def cartesian_index(orient: str, r: int, c: int) -> int:
    """1-based index of the grid line carrying a qubit (rows for h, columns for v)."""
    return r + 1 if orient == "h" else c + 1


def _retained(orient: str, r: int, c: int, family: Family, s: int) -> bool:
    period = s + 1
    if family.diagonal:
        on_line = diagonal_index(orient, r, c) % period == 0
        # Off-line diagonals lose one orientation; the retained diagonals stay whole.
        stripped = "v" if family is Family.DV else "h"
        return on_line or orient != stripped
    stripped = "h" if family is Family.CH else "v"
    if orient != stripped:
        return True
    return cartesian_index(orient, r, c) % period == 1 % period


@dataclass(frozen=True, eq=False)
class DilutedGraph:
    """One stage of a dilution sequence: the Tanner graph restricted to active qubits.

    ``girth`` is the girth of the diluted Z-lattice (the lattice on which the
    pattern is defined); ``-1`` means the lattice is a forest.
    """

    code: SurfaceCode = field(repr=False)
    family: Family
    s: int
    stage_index: int
    active: np.ndarray = field(repr=False)
    z_neighbors: tuple[tuple[int, ...], ...] = field(repr=False)
    x_neighbors: tuple[tuple[int, ...], ...] = field(repr=False)
    girth: int

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def check_neighbors(self) -> dict[str, tuple[tuple[int, ...], ...]]:
        return {"Z": self.z_neighbors, "X": self.x_neighbors}

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.active)


def _restrict(checks: Sequence[Sequence[int]], active: np.ndarray):
    return tuple(tuple(q for q in nb if active[q]) for nb in checks)


def _graph_from_mask(code, family, s, stage, active) -> DilutedGraph:
    active = np.asarray(active, dtype=bool)
    active.setflags(write=False)
    z_nb = _restrict(code.z_checks, active)
    x_nb = _restrict(code.x_checks, active)
    graph = DilutedGraph(code, family, s, stage, active, z_nb, x_nb, girth=-1)
    object.__setattr__(graph, "girth", lattice_girth(graph, "Z"))
    return graph


def sparsify(code: SurfaceCode, pattern: SparsificationPattern, stage_index: int = 0) -> DilutedGraph:
    """Apply an s-sparsification pattern to ``code``.

    Raises:
        GeometryError: if ``pattern.s >= code.d``.
    """
    if pattern.s >= code.d:
        raise GeometryError(f"invalid ratio s={pattern.s} for distance d={code.d} (need s < d)")
    mask = np.fromiter(
        (_retained(o, r, c, pattern.family, pattern.s) for o, r, c in code.qubits),
        dtype=bool,
        count=code.n,
    )
    return _graph_from_mask(code, pattern.family, pattern.s, stage_index, mask)


def num_stages(d: int) -> int:
    """K = floor(log2(d - 1)); the sequence has K + 1 stages."""
    if d < 2:
        raise GeometryError(f"invalid distance {d!r}")
    return (d - 1).bit_length() - 1


@dataclass(frozen=True, eq=False)
class DilutionSequence:
    code: SurfaceCode = field(repr=False)
    family: Family
    stages: tuple[DilutedGraph, ...]

    @property
    def K(self) -> int:
        return len(self.stages) - 1

    @property
    def ratios(self) -> tuple[int, ...]:
        return tuple(g.s for g in self.stages)

    def __len__(self):
        return len(self.stages)

    def __getitem__(self, k):
        return self.stages[k]

    def __iter__(self):
        return iter(self.stages)


def dilution_sequence(code: SurfaceCode, family: "Family | str", stages: int | None = None) -> DilutionSequence:
    """Nested diluted graphs with ratios s_k = 2**k - 1 for k = 0..K.

    ``stages`` truncates the sequence (``1`` gives the undiluted graph only).
    """
    family = Family.parse(family)
    K = num_stages(code.d)
    count = K + 1 if stages is None else min(int(stages), K + 1)
    graphs = tuple(
        sparsify(code, SparsificationPattern(family, 2**k - 1), stage_index=k) for k in range(count)
    )
    return DilutionSequence(code, family, graphs)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Check-vertex / qubit-edge graph of one check type.

    ``edges`` maps each active qubit to its one or two check endpoints; a
    single endpoint marks a boundary (dangling) edge.
    """

    check_type: str
    num_vertices: int
    edges: dict[int, tuple[int, ...]]

    def adjacency(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_vertices)]
        for q, ends in self.edges.items():
            if len(ends) == 2:
                a, b = ends
                adj[a].append((b, q))
                adj[b].append((a, q))
        return adj

    def components(self) -> list[set[int]]:
        """Connected components over vertices that carry at least one edge."""
        rows, cols = [], []
        touched = set()
        for ends in self.edges.values():
            touched.update(ends)
            if len(ends) == 2:
                rows.append(ends[0])
                cols.append(ends[1])
        m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.num_vertices,) * 2)
        _, labels = connected_components(m, directed=False)
        groups: dict[int, set[int]] = {}
        for v in touched:
            groups.setdefault(int(labels[v]), set()).add(v)
        return sorted(groups.values(), key=min)


def _lattice(check_type: str, neighbors: Sequence[Sequence[int]]) -> Lattice:
    ends: dict[int, list[int]] = {}
    for a, nb in enumerate(neighbors):
        for q in nb:
            ends.setdefault(q, []).append(a)
    return Lattice(check_type, len(neighbors), {q: tuple(v) for q, v in sorted(ends.items())})


def component_lattices(graph: DilutedGraph) -> tuple[Lattice, Lattice]:
    """The diluted X-lattice (X-check vertices) and Z-lattice (Z-check vertices)."""
    return _lattice("X", graph.x_neighbors), _lattice("Z", graph.z_neighbors)


def _two_core(adj: list[list[tuple[int, int]]]) -> list[bool]:
    """Vertices surviving repeated removal of degree <= 1 vertices."""
    deg = [len(a) for a in adj]
    alive = [True] * len(adj)
    stack = [v for v, k in enumerate(deg) if k <= 1]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for w, _ in adj[v]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
    return alive


def _girth(lat: Lattice) -> int:
    adj = lat.adjacency()
    # every cycle lies in the 2-core, so trees hanging off it need no BFS
    core = _two_core(adj)
    best = None
    for src in range(lat.num_vertices):
        if not core[src]:
            continue
        dist = {src: 0}
        via = {src: -1}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            if best is not None and 2 * dist[u] + 1 >= best:
                break
            for w, q in adj[u]:
                if q == via[u]:
                    continue
                if w in dist:
                    length = dist[u] + dist[w] + 1
                    if best is None or length < best:
                        best = length
                else:
                    dist[w] = dist[u] + 1
                    via[w] = q
                    queue.append(w)
    return -1 if best is None else best


def lattice_girth(graph: DilutedGraph, check_type: str = "Z") -> int:
    """BFS girth of one diluted component lattice (-1 if acyclic)."""
    x_lat, z_lat = component_lattices(graph)
    return _girth(z_lat if check_type.upper() == "Z" else x_lat)


def export_graph(graph: DilutedGraph, fmt: str = "edge-list") -> str:
    """Serialize a diluted Tanner graph as ``dot`` or ``edge-list`` text."""
    header = (
        f"d={graph.code.d} family={graph.family.value} s={graph.s} "
        f"stage={graph.stage_index} n={graph.code.n}"
    )
    out = io.StringIO()
    if fmt == "edge-list":
        out.write(f"# {header}\n")
        for label, nbs in (("X", graph.x_neighbors), ("Z", graph.z_neighbors)):
            for a, nb in enumerate(nbs):
                for q in nb:
                    out.write(f"{label} {a} {q}\n")
    elif fmt == "dot":
        out.write(f"graph tanner {{\n  // {header}\n")
        for q in graph.active_indices():
            o, r, c = graph.code.qubits[q]
            out.write(f'  q{q} [shape=circle, label="{o}{r},{c}"];\n')
        for label, nbs in (("X", graph.x_neighbors), ("Z", graph.z_neighbors)):
            for a in range(len(nbs)):
                out.write(f"  {label}{a} [shape=square];\n")
        for label, nbs in (("X", graph.x_neighbors), ("Z", graph.z_neighbors)):
            for a, nb in enumerate(nbs):
                for q in nb:
                    out.write(f"  {label}{a} -- q{q};\n")
        out.write("}\n")
    else:
        raise GeometryError(f"unknown export format {fmt!r}")
    return out.getvalue()


def read_edge_list(text: str | Iterable[str]) -> DilutedGraph:
    """Parse the ``edge-list`` export back into a :class:`DilutedGraph`."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    meta: dict[str, str] = {}
    pairs: list[tuple[str, int, int]] = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                meta[key] = val
            continue
        kind, a, q = line.split()
        if kind not in ("X", "Z"):
            raise GeometryError(f"bad check type in edge list: {kind!r}")
        pairs.append((kind, int(a), int(q)))
    try:
        code = build_surface_code(int(meta["d"]))
        family = Family.parse(meta["family"])
        s, stage = int(meta["s"]), int(meta["stage"])
    except KeyError as exc:
        raise GeometryError(f"edge list header lacks {exc}") from None
    active = np.zeros(code.n, dtype=bool)
    for _, _, q in pairs:
        active[q] = True
    return _graph_from_mask(code, family, s, stage, active)
