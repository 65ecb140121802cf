"""Staged decoding over a dilution sequence with collective decimation.

At stage ``k`` quaternary MP runs on the stage-``k`` Tanner graph against the
residual syndrome.  If it has not reproduced the syndrome when its budget
runs out, every qubit that the next stage drops is frozen to its current
hard decision, the frozen qubits' syndrome is folded into the residual, and
MP restarts from prior-only messages on the next (sparser) graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .geometry import DilutionSequence, Family, SurfaceCode, build_surface_code, dilution_sequence, num_stages
from .mp import MpConfig, StagePlan, plan_for_graph, run_mp
from .noise import Prior
from .pauli import PauliConfig, Syndrome

__all__ = [
    "DecodeOutcome",
    "StageRecord",
    "CompiledSequence",
    "compile_sequence",
    "decode",
    "max_iteration_budget",
    "stage_budgets",
]


def max_iteration_budget(d: int) -> int:
    """Sum of the default per-stage budgets, ``10 (K+1)(K+2)``."""
    K = num_stages(d)
    return 10 * (K + 1) * (K + 2)


def stage_budgets(K: int, base: int = 20) -> tuple[int, ...]:
    """Default schedule ``I_k = base * (k + 1)`` for ``k = 0..K``."""
    return tuple(base * (k + 1) for k in range(K + 1))


@dataclass(frozen=True, eq=False)
class CompiledSequence:
    """A dilution sequence with per-stage plans and decimation sets precomputed."""

    code: SurfaceCode
    sequence: DilutionSequence
    plans: tuple[StagePlan, ...]
    decimated: tuple[np.ndarray, ...]  # qubits frozen after stage k (k < K)

    @property
    def K(self) -> int:
        return len(self.plans) - 1


def _compile(sequence: DilutionSequence) -> CompiledSequence:
    plans = tuple(plan_for_graph(g) for g in sequence)
    dec = []
    for k in range(len(sequence) - 1):
        dec.append(np.flatnonzero(sequence[k].active & ~sequence[k + 1].active))
    return CompiledSequence(sequence.code, sequence, plans, tuple(dec))


@lru_cache(maxsize=64)
def _cached(d: int, family: Family, stages: int | None) -> CompiledSequence:
    code = build_surface_code(d)
    return _compile(dilution_sequence(code, family, stages))


def compile_sequence(d_or_sequence, family: "Family | str | None" = None, stages: int | None = None) -> CompiledSequence:
    """Compile (and cache) the sequence for ``(d, family)``, or wrap an explicit sequence."""
    if isinstance(d_or_sequence, DilutionSequence):
        return _compile(d_or_sequence)
    return _cached(int(d_or_sequence), Family.parse(family), stages)


@dataclass(frozen=True)
class StageRecord:
    stage: int
    iterations: int
    residual_before: Syndrome = field(repr=False)
    frozen_after: PauliConfig | None = field(repr=False, default=None)


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    """Result of one decode.

    ``stage_of_convergence`` is the stage whose MP run reproduced the
    syndrome, or ``None`` when no stage did (the final estimate is then the
    frozen decisions plus the last stage's hard decision).
    """

    estimate: PauliConfig
    converged: bool
    stage_of_convergence: int | None
    total_iterations: int
    per_stage_iterations: tuple[int, ...]
    records: tuple[StageRecord, ...] = field(repr=False, default=())


def _syn_of(code: SurfaceCode, qubits: np.ndarray, x: np.ndarray, z: np.ndarray):
    """Syndrome contribution of values ``x``/``z`` placed on ``qubits``."""
    sz = (code.hz[:, qubits[x.astype(bool)]].sum(axis=1) & 1).astype(np.uint8)
    sx = (code.hx[:, qubits[z.astype(bool)]].sum(axis=1) & 1).astype(np.uint8)
    return sz, sx


def decode(
    code: SurfaceCode,
    sequence: "DilutionSequence | CompiledSequence",
    syndrome: Syndrome,
    prior: Prior,
    config: MpConfig,
    budgets: Sequence[int] | None = None,
    keep_records: bool = False,
    backend=None,
) -> DecodeOutcome:
    """Decode ``syndrome`` across the stages of ``sequence``.

    Args:
        budgets: iterations per stage; defaults to ``20 (k + 1)``.  The
            ``max_iters`` field of ``config`` is ignored here.
        keep_records: keep per-stage residual syndromes and frozen values
            (used by the bookkeeping tests).

    Raises:
        ValueError: if the sequence was built for a different code or the
            syndrome has the wrong size.
    """
    comp = sequence if isinstance(sequence, CompiledSequence) else _compile(sequence)
    if comp.code.d != code.d:
        raise ValueError(f"sequence built for d={comp.code.d}, code has d={code.d}")
    if syndrome.z_bits.shape[0] != code.num_z_checks or syndrome.x_bits.shape[0] != code.num_x_checks:
        raise ValueError("syndrome size does not match the code")
    K = comp.K
    if budgets is None:
        budgets = stage_budgets(K)
    budgets = tuple(int(b) for b in budgets)
    if len(budgets) < K + 1:
        raise ValueError(f"need {K + 1} stage budgets, got {len(budgets)}")

    n = code.n
    est_x = np.zeros(n, np.uint8)
    est_z = np.zeros(n, np.uint8)
    res_z = syndrome.z_bits.copy()
    res_x = syndrome.x_bits.copy()
    per_stage: list[int] = []
    records: list[StageRecord] = []
    conv_stage = None
    for k in range(K + 1):
        plan = comp.plans[k]
        cfg = MpConfig(config.mode, config.eps, budgets[k], config.clip, config.phi_mode, config.init_memory)
        before = Syndrome(res_z.copy(), res_x.copy()) if keep_records else None
        res = run_mp(plan, (res_z, res_x), prior, cfg, backend=backend)
        per_stage.append(res.iterations)
        loc = res.local_estimate
        if res.converged:
            est_x[plan.act] ^= loc.x
            est_z[plan.act] ^= loc.z
            conv_stage = k
            if keep_records:
                records.append(StageRecord(k, res.iterations, before))
            break
        if k == K:
            est_x[plan.act] ^= loc.x
            est_z[plan.act] ^= loc.z
            if keep_records:
                records.append(StageRecord(k, res.iterations, before))
            break
        dq = comp.decimated[k]
        pos = np.searchsorted(plan.act, dq)
        fx, fz = loc.x[pos], loc.z[pos]
        est_x[dq] = fx
        est_z[dq] = fz
        sz, sx = _syn_of(code, dq, fx, fz)
        res_z ^= sz
        res_x ^= sx
        if keep_records:
            frozen = PauliConfig.identity(n)
            frozen.x[dq] = fx
            frozen.z[dq] = fz
            records.append(StageRecord(k, res.iterations, before, frozen))

    estimate = PauliConfig(est_x, est_z)
    out_z = (code.hz @ est_x) & 1
    out_x = (code.hx @ est_z) & 1
    converged = bool(np.array_equal(out_z, syndrome.z_bits) and np.array_equal(out_x, syndrome.x_bits))
    return DecodeOutcome(
        estimate=estimate,
        converged=converged,
        stage_of_convergence=conv_stage,
        total_iterations=int(sum(per_stage)),
        per_stage_iterations=tuple(per_stage),
        records=tuple(records),
    )
