"""Log-domain quaternary message passing with XZ-correlation messages.

Every qubit carries a joint prior over its (x, z) error bits.  Z-check edges
carry log-ratios ``log P(x=0)/P(x=1)`` and X-check edges the analogous
ratios for z.  The two halves talk to each other only through the
correlation messages ``phi_X`` / ``phi_Z``, which marginalize the joint prior
against the opposite-type incoming messages.

The schedule is synchronous flooding.  One iteration is

1. check update on both check types,
2. correlation messages and effective fields from the new check messages,
3. hard decision and syndrome test (early exit if requested),
4. damped variable update, blending in the fields of the previous iteration
   (the field of iteration ``t`` is built from the check messages of ``t - 1``,
   so the memory lags the fresh check messages by one step).

Hot loops live in a backend (compiled if available, numpy otherwise); the
functions exported here are thin wrappers used for testing and inspection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .geometry import DilutedGraph
from .noise import Prior, xz_coupling
from .pauli import PauliConfig, Syndrome

__all__ = [
    "CLIP",
    "Mode",
    "PhiMode",
    "MpConfig",
    "StagePlan",
    "MessageState",
    "MpResult",
    "build_plan",
    "plan_for_graph",
    "init_state",
    "correlation_message",
    "check_update",
    "variable_update",
    "effective_fields",
    "hard_decision",
    "run_mp",
]

CLIP = 30.0
# Priors with |kappa| below this are treated as exact products, so the
# correlation messages reduce to the marginal log-ratios.
DECOUPLE_TOL = 1e-14


class Mode(str, enum.Enum):
    MINSUM = "minsum"
    SUMPRODUCT = "sumproduct"


class PhiMode(str, enum.Enum):
    MAX = "max"
    SUM = "sum"


@dataclass(frozen=True)
class MpConfig:
    """Engine settings.

    Attributes:
        mode: Min-Sum (default) or Sum-Product check rule.
        eps: damping factor in [0, 1).
        max_iters: iteration cap for a single :func:`run_mp` call.
        clip: bound on every log-ratio.
        phi_mode: marginalization inside the correlation message.  Sum-Product
            always uses ``sum``.
        init_memory: ``"prior"`` seeds the damping memory with the prior
            log-ratio, so the first messages equal the prior; ``"zero"`` starts
            the memory at 0, giving first messages ``(1 - eps) * phi``.
    """

    mode: Mode = Mode.MINSUM
    eps: float = 0.15
    max_iters: int = 100
    clip: float = CLIP
    phi_mode: PhiMode = PhiMode.MAX
    init_memory: str = "prior"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "phi_mode", PhiMode(self.phi_mode))
        if not 0.0 <= self.eps < 1.0:
            raise ValueError(f"damping factor must lie in [0, 1), got {self.eps}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not self.clip > 0:
            raise ValueError("clip must be positive")
        if self.init_memory not in ("prior", "zero"):
            raise ValueError(f"init_memory must be 'prior' or 'zero', got {self.init_memory!r}")

    @property
    def effective_phi_mode(self) -> PhiMode:
        return PhiMode.SUM if self.mode is Mode.SUMPRODUCT else self.phi_mode


@dataclass(frozen=True, eq=False)
class StagePlan:
    """Flat index tables for one Tanner graph.

    Variables are numbered locally ``0..nv-1``; ``act`` maps them to global
    qubit indices.  Edges are grouped by check (CSR ``*_ptr`` / ``*_var``).
    Padding uses ``-1`` in edge tables and ``nv`` (or the edge count) in
    gather tables.
    """

    n: int
    act: np.ndarray
    nv: int
    mz: int
    mx: int
    z_ptr: np.ndarray
    z_var: np.ndarray
    x_ptr: np.ndarray
    x_var: np.ndarray
    vz_tab: np.ndarray  # (nv, wz) Z-edge ids per variable, padded with nez
    vx_tab: np.ndarray
    z_other: np.ndarray  # other Z-edge of the same variable, or nez
    x_other: np.ndarray
    z_tab: np.ndarray  # (nonempty Z-checks, degree) edge ids, -1 padded
    z_rows: np.ndarray
    x_tab: np.ndarray
    x_rows: np.ndarray
    z_chk: np.ndarray  # (mz, degree) local var ids, nv padded
    x_chk: np.ndarray

    @property
    def nez(self) -> int:
        return int(self.z_var.shape[0])

    @property
    def nex(self) -> int:
        return int(self.x_var.shape[0])

    @property
    def z_edge_var(self) -> np.ndarray:
        return self.z_var

    @property
    def x_edge_var(self) -> np.ndarray:
        return self.x_var


def _side_tables(checks_local, nv):
    m = len(checks_local)
    ptr = np.zeros(m + 1, dtype=np.int32)
    for a, nb in enumerate(checks_local):
        ptr[a + 1] = ptr[a] + len(nb)
    var = np.array([v for nb in checks_local for v in nb], dtype=np.int32)
    ne = var.shape[0]
    per_var: list[list[int]] = [[] for _ in range(nv)]
    for e, v in enumerate(var):
        per_var[v].append(e)
    w = max([len(p) for p in per_var] + [1])
    if w > 2:
        raise ValueError("a variable touches more than two checks of one type")
    vtab = np.full((nv, w), ne, dtype=np.int32)
    other = np.full(ne, ne, dtype=np.int32)
    for v, es in enumerate(per_var):
        vtab[v, : len(es)] = es
        if len(es) == 2:
            other[es[0]], other[es[1]] = es[1], es[0]
    deg = max([len(nb) for nb in checks_local] + [1])
    rows = np.array([a for a, nb in enumerate(checks_local) if nb], dtype=np.int32)
    tab = np.full((rows.shape[0], deg), -1, dtype=np.int32)
    chk = np.full((m, deg), nv, dtype=np.int32)
    for r, a in enumerate(rows):
        tab[r, : ptr[a + 1] - ptr[a]] = np.arange(ptr[a], ptr[a + 1])
    for a, nb in enumerate(checks_local):
        chk[a, : len(nb)] = nb
    return ptr, var, vtab, other, tab, rows, chk


def build_plan(n: int, active: Sequence[int], z_checks, x_checks) -> StagePlan:
    """Plan for a Tanner graph given global check neighborhoods restricted to ``active``."""
    act = np.asarray(sorted(active), dtype=np.int64)
    local = {int(q): i for i, q in enumerate(act)}
    nv = act.shape[0]
    zl = [[local[q] for q in nb] for nb in z_checks]
    xl = [[local[q] for q in nb] for nb in x_checks]
    z_ptr, z_var, vz, zo, zt, zr, zc = _side_tables(zl, nv)
    x_ptr, x_var, vx, xo, xt, xr, xc = _side_tables(xl, nv)
    return StagePlan(
        n=n, act=act, nv=nv, mz=len(zl), mx=len(xl),
        z_ptr=z_ptr, z_var=z_var, x_ptr=x_ptr, x_var=x_var,
        vz_tab=vz, vx_tab=vx, z_other=zo, x_other=xo,
        z_tab=zt, z_rows=zr, x_tab=xt, x_rows=xr, z_chk=zc, x_chk=xc,
    )


def plan_for_graph(graph: DilutedGraph) -> StagePlan:
    return build_plan(graph.code.n, graph.active_indices(), graph.z_neighbors, graph.x_neighbors)


@dataclass(eq=False)
class MessageState:
    """All per-edge and per-qubit quantities of one MP run.

    ``h_x`` / ``h_z`` are the latest effective fields; ``mem_x`` / ``mem_z``
    hold the fields of the previous iteration, which the next variable update
    blends in with weight ``eps``.
    """

    v2c_z: np.ndarray
    v2c_x: np.ndarray
    c2v_z: np.ndarray
    c2v_x: np.ndarray
    h_x: np.ndarray
    h_z: np.ndarray
    mem_x: np.ndarray
    mem_z: np.ndarray
    t: int = 0

    def copy(self) -> "MessageState":
        return MessageState(*(a.copy() for a in self.arrays()), self.t)

    def arrays(self):
        return (self.v2c_z, self.v2c_x, self.c2v_z, self.c2v_x, self.h_x, self.h_z, self.mem_x, self.mem_z)


def _log_prior(prior: Prior) -> np.ndarray:
    lt = prior.log_table()  # [x, z]
    return np.array([lt[0, 0], lt[0, 1], lt[1, 0], lt[1, 1]])


def _marginal_llr(p1: float, clip: float) -> float:
    p0 = 1.0 - p1
    if p1 <= 0.0:
        return clip
    if p0 <= 0.0:
        return -clip
    return float(min(max(math.log(p0) - math.log(p1), -clip), clip))


@dataclass(frozen=True)
class _PriorSpec:
    lp: np.ndarray
    decoupled: bool
    phi0: np.ndarray


def _prior_spec(prior: Prior, clip: float) -> _PriorSpec:
    decoupled = abs(xz_coupling(prior)) < DECOUPLE_TOL
    phi0 = np.array([_marginal_llr(prior.p_x_marginal, clip), _marginal_llr(prior.p_z_marginal, clip)])
    return _PriorSpec(_log_prior(prior), decoupled, phi0)


def correlation_message(H, G, prior: Prior, phi_mode: "PhiMode | str" = PhiMode.MAX, clip: float = CLIP):
    """Correlation log-ratios ``(phi_X, phi_Z)``.

    ``H`` is the summed incoming X-check (z-component) messages and ``G`` the
    summed incoming Z-check (x-component) messages.  For a product prior the
    result is the marginal log-ratio regardless of ``H`` and ``G``.
    """
    spec = _prior_spec(prior, clip)
    H = np.asarray(H, dtype=float)
    G = np.asarray(G, dtype=float)
    if spec.decoupled:
        shape = np.broadcast(H, G).shape
        return np.full(shape, spec.phi0[0])[()], np.full(shape, spec.phi0[1])[()]
    mode = 0 if PhiMode(phi_mode) is PhiMode.MAX else 1
    px, pz = _backend.py.phi_pair(H, G, spec.lp, mode, clip)
    return px[()], pz[()]


def init_state(plan: StagePlan, prior: Prior, config: MpConfig) -> MessageState:
    """Prior-only variable-to-check messages (uniform incoming check messages)."""
    spec = _prior_spec(prior, config.clip)
    if spec.decoupled:
        phx, phz = spec.phi0
    else:
        mode = 0 if config.effective_phi_mode is PhiMode.MAX else 1
        phx, phz = (float(np.ravel(v)[0]) for v in _backend.py.phi_pair(np.zeros(1), np.zeros(1), spec.lp, mode, config.clip))
    eps = config.eps
    mem_x = phx if config.init_memory == "prior" else 0.0
    mem_z = phz if config.init_memory == "prior" else 0.0
    c = config.clip
    vz = min(max((0.0 + (1.0 - eps) * phx) + eps * mem_x, -c), c)
    vx = min(max((0.0 + (1.0 - eps) * phz) + eps * mem_z, -c), c)
    return MessageState(
        v2c_z=np.full(plan.nez, vz),
        v2c_x=np.full(plan.nex, vx),
        c2v_z=np.zeros(plan.nez),
        c2v_x=np.zeros(plan.nex),
        h_x=np.full(plan.nv, phx),
        h_z=np.full(plan.nv, phz),
        mem_x=np.full(plan.nv, mem_x),
        mem_z=np.full(plan.nv, mem_z),
    )


def _syn_arrays(plan: StagePlan, syndrome) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(syndrome, Syndrome):
        sz, sx = syndrome.z_bits, syndrome.x_bits
    else:
        sz, sx = syndrome
    sz = np.ascontiguousarray(sz, dtype=np.uint8)
    sx = np.ascontiguousarray(sx, dtype=np.uint8)
    if sz.shape[0] != plan.mz or sx.shape[0] != plan.mx:
        raise ValueError(
            f"syndrome has ({sz.shape[0]}, {sx.shape[0]}) bits, graph has ({plan.mz}, {plan.mx}) checks"
        )
    return sz, sx


def check_update(plan: StagePlan, syndrome, state: MessageState, config: MpConfig) -> MessageState:
    """Refresh the check-to-variable messages of ``state`` in place."""
    sz, sx = _syn_arrays(plan, syndrome)
    mode = 0 if config.mode is Mode.MINSUM else 1
    py = _backend.py
    py._side_check_update(plan.z_tab, state.v2c_z, sz[plan.z_rows], mode, config.clip, state.c2v_z)
    py._side_check_update(plan.x_tab, state.v2c_x, sx[plan.x_rows], mode, config.clip, state.c2v_x)
    return state


def _phis(plan, prior, state, config):
    py = _backend.py
    Sz = py._sum_pad(state.c2v_z, plan.vz_tab)
    Sx = py._sum_pad(state.c2v_x, plan.vx_tab)
    phx, phz = correlation_message(Sx, Sz, prior, config.effective_phi_mode, config.clip)
    return Sz, Sx, np.broadcast_to(phx, Sz.shape), np.broadcast_to(phz, Sx.shape)


def effective_fields(plan: StagePlan, prior: Prior, state: MessageState, config: MpConfig):
    """``(h_X, h_Z)`` from the current check messages (stored into ``state`` too)."""
    Sz, Sx, phx, phz = _phis(plan, prior, state, config)
    c = config.clip
    state.h_x[:] = np.clip(Sz + phx, -c, c)
    state.h_z[:] = np.clip(Sx + phz, -c, c)
    return state.h_x, state.h_z


def variable_update(plan: StagePlan, prior: Prior, state: MessageState, config: MpConfig) -> MessageState:
    """Damped variable-to-check update with ``state.mem_*`` as memory.

    Afterwards the memory is advanced to the current fields ``state.h_*``.
    """
    _, _, phx, phz = _phis(plan, prior, state, config)
    eps, c = config.eps, config.clip
    om = 1.0 - eps
    if plan.nez:
        v = plan.z_var
        others = np.append(state.c2v_z, 0.0)[plan.z_other]
        state.v2c_z[:] = np.clip((others + om * phx[v]) + eps * state.mem_x[v], -c, c)
    if plan.nex:
        v = plan.x_var
        others = np.append(state.c2v_x, 0.0)[plan.x_other]
        state.v2c_x[:] = np.clip((others + om * phz[v]) + eps * state.mem_z[v], -c, c)
    state.mem_x[:] = state.h_x
    state.mem_z[:] = state.h_z
    return state


def hard_decision(h_x, h_z) -> PauliConfig:
    """x = 1 iff h_X < 0, z = 1 iff h_Z < 0 (a zero field decides 0)."""
    return PauliConfig(np.asarray(h_x) < 0, np.asarray(h_z) < 0)


@dataclass(eq=False)
class MpResult:
    state: MessageState
    converged_at: int | None
    iterations: int
    local_estimate: PauliConfig = field(repr=False)
    plan: StagePlan = field(repr=False)

    @property
    def estimate(self) -> PauliConfig:
        """Hard decision embedded into the full qubit register."""
        x = np.zeros(self.plan.n, np.uint8)
        z = np.zeros(self.plan.n, np.uint8)
        x[self.plan.act] = self.local_estimate.x
        z[self.plan.act] = self.local_estimate.z
        return PauliConfig(x, z)

    @property
    def converged(self) -> bool:
        return self.converged_at is not None


def run_mp(
    graph: "DilutedGraph | StagePlan",
    syndrome,
    prior: Prior,
    config: MpConfig,
    init: MessageState | None = None,
    stop_on_converge: bool = True,
    backend=None,
) -> MpResult:
    """Flooding iterations up to ``config.max_iters`` on one Tanner graph.

    ``syndrome`` is the target for the active qubits (for a diluted stage,
    the residual syndrome).  Convergence means every check, including those
    left without active neighbors, sees the requested parity.
    """
    plan = graph if isinstance(graph, StagePlan) else plan_for_graph(graph)
    sz, sx = _syn_arrays(plan, syndrome)
    spec = _prior_spec(prior, config.clip)
    state = init.copy() if init is not None else init_state(plan, prior, config)
    xdec = np.zeros(plan.nv, np.uint8)
    zdec = np.zeros(plan.nv, np.uint8)
    kern = backend or _backend.kernels
    iters, first = kern.mp_iterate(
        plan, sz, sx, spec.lp, float(config.eps), float(config.clip),
        0 if config.mode is Mode.MINSUM else 1,
        0 if config.effective_phi_mode is PhiMode.MAX else 1,
        bool(spec.decoupled), spec.phi0, int(config.max_iters), bool(stop_on_converge),
        *state.arrays(), xdec, zdec,
    )
    state.t += iters
    return MpResult(state, first or None, iters, PauliConfig(xdec, zdec), plan)
