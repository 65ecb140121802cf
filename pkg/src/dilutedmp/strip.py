"""One-dimensional periodic strip: a toy model of dilution dynamics.

The strip is a periodic ladder of length ``d``: two rails of ``d`` edges
each (the non-contractible vertical loops, which are the logical operators)
joined by ``d`` rungs.  Vertices are parity checks and edges are qubits
under single-X noise.  Stage ``k`` keeps every rail edge and the rungs at
positions divisible by ``2**k``, so its girth is ``2**(k+1) + 2``, which is
``2 s_k + 4`` for ``s_k = 2**k - 1``.

Edge numbering: rail edge ``L_r`` (between rows ``r`` and ``r+1`` on the
left) is ``r``, ``R_r`` is ``d + r`` and rung ``r`` is ``2d + r``.  Vertex
``(r, L)`` is ``r`` and ``(r, R)`` is ``d + r``.

A cell at stage ``k`` is the stretch of rows ``[i 2**k, (i+1) 2**k)`` on both
rails plus the rung that opens it; a block is two consecutive cells, and
the rung between them is the one decimated on the way to stage ``k + 1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .geometry import Lattice, _girth
from .mp import Mode, MpConfig, build_plan, run_mp
from .noise import NoiseKind, NoiseModel, prior_of

__all__ = [
    "Strip",
    "StripOutcome",
    "DilutionStep",
    "BlockExperimentResult",
    "stage_schedule",
    "renormalize",
    "strip_decode",
    "dilution_map_step",
    "block_experiment",
    "write_block_csv",
]

BLOCK_CSV_HEADER = ["k", "n_B", "n_C_mean", "n_samples", "w_corr", "w_wrong"]


def stage_schedule(k: int) -> int:
    """Iterations at stage ``k``: ``min(2**k, 20k + 20)``."""
    return min(2**k, 20 * k + 20)


@dataclass(frozen=True, eq=False)
class Strip:
    d: int
    K: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"strip length must be at least 2, got {self.d}")
        if self.K < 0 or self.d % (2**self.K):
            raise ValueError(f"d={self.d} is not divisible by 2**K={2**self.K}")

    @classmethod
    def of_length(cls, d: int, stages: int | None = None) -> "Strip":
        """Strip with ``K = floor(log2 d)`` unless ``stages`` (= K + 1) is given."""
        K = d.bit_length() - 1 if stages is None else stages - 1
        return cls(d, K)

    @property
    def n(self) -> int:
        return 3 * self.d

    @property
    def num_checks(self) -> int:
        return 2 * self.d

    def rail(self, side: str, r: int) -> int:
        return (r % self.d) + (0 if side == "L" else self.d)

    def rung(self, r: int) -> int:
        return 2 * self.d + (r % self.d)

    @cached_property
    def ends(self) -> np.ndarray:
        """``(n, 2)`` array of edge endpoints."""
        d = self.d
        out = np.empty((self.n, 2), dtype=np.int64)
        r = np.arange(d)
        out[:d] = np.stack([r, (r + 1) % d], axis=1)
        out[d:2 * d] = out[:d] + d
        out[2 * d:] = np.stack([r, r + d], axis=1)
        return out

    @cached_property
    def H(self) -> np.ndarray:
        h = np.zeros((self.num_checks, self.n), dtype=np.uint8)
        cols = np.arange(self.n)
        h[self.ends[:, 0], cols] = 1
        h[self.ends[:, 1], cols] = 1
        return h

    def active(self, k: int) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[2 * self.d:] = np.arange(self.d) % (2**k) == 0
        return mask

    def removed(self, k: int) -> np.ndarray:
        """Qubits active at stage ``k`` but not at ``k + 1``."""
        return np.flatnonzero(self.active(k) & ~self.active(k + 1))

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return (self.H @ np.asarray(e, dtype=np.uint8)) & 1

    def logical_parity(self, e: np.ndarray) -> int:
        """Parity of the crossings with the cut between rows 0 and 1."""
        e = np.asarray(e)
        return int(e[0] ^ e[self.d]) & 1

    def girth(self, k: int) -> int:
        act = np.flatnonzero(self.active(k))
        lat = Lattice("Z", self.num_checks, {int(q): tuple(int(v) for v in self.ends[q]) for q in act})
        return _girth(lat)

    @cached_property
    def _plans(self):
        checks = [[] for _ in range(self.num_checks)]
        for q, (a, b) in enumerate(self.ends):
            checks[a].append(q)
            checks[b].append(q)
        plans = []
        for k in range(self.K + 1):
            act = self.active(k)
            zc = [[q for q in nb if act[q]] for nb in checks]
            plans.append(build_plan(self.n, np.flatnonzero(act), zc, []))
        return tuple(plans)


def _run_stage(strip: Strip, k: int, syn: np.ndarray, p: float, eps: float, iters: int, stop: bool):
    prior = prior_of(NoiseModel(NoiseKind.SINGLE_X, p))
    cfg = MpConfig(Mode.MINSUM, eps=eps, max_iters=max(iters, 1))
    return run_mp(strip._plans[k], (syn.astype(np.uint8), np.zeros(0, np.uint8)), prior, cfg,
                  stop_on_converge=stop)


def renormalize(strip: Strip, k: int, syndrome: np.ndarray) -> np.ndarray:
    """Minimum-weight edge set on stage ``k`` with the given syndrome.

    Exact transfer-matrix DP around the ring.  The state is the pair of
    rail-edge bits entering row ``r``; the ring closes by requiring the
    bits leaving row ``d - 1`` to equal the ones assumed on entry.

    Raises:
        ValueError: if the syndrome has odd weight (no edge set produces it).
    """
    syn = np.asarray(syndrome, dtype=np.uint8)
    if int(syn.sum()) & 1:
        raise ValueError("odd-weight syndrome has no edge-set preimage")
    d = strip.d
    rung_ok = strip.active(k)[2 * d:]
    inf = 1 << 30
    best_cost, best_cfg = inf, None
    for start in range(4):
        l0, r0 = start >> 1, start & 1
        cost = np.full(4, inf, dtype=np.int64)
        cost[start] = 0
        back = np.zeros((d, 4, 2), dtype=np.int64)  # (previous state, rung bit)
        for r in range(d):
            tl, tr = int(syn[r]), int(syn[d + r])
            nxt = np.full(4, inf, dtype=np.int64)
            for s in range(4):
                if cost[s] >= inf:
                    continue
                li, ri = s >> 1, s & 1
                for u in ((0, 1) if rung_ok[r] else (0,)):
                    lo, ro = tl ^ li ^ u, tr ^ ri ^ u
                    c = cost[s] + u + lo + ro
                    t = (lo << 1) | ro
                    if c < nxt[t]:
                        nxt[t] = c
                        back[r, t] = (s, u)
            cost = nxt
        if cost[start] < best_cost:
            best_cost = int(cost[start])
            cfg = np.zeros(strip.n, dtype=np.uint8)
            s = start
            for r in range(d - 1, -1, -1):
                cfg[r] = s >> 1
                cfg[d + r] = s & 1
                s, u = back[r, s]
                cfg[2 * d + r] = u
            best_cfg = cfg
    return best_cfg


@dataclass(frozen=True)
class StripOutcome:
    success: bool
    converged: bool
    stage: int | None
    iterations: int
    estimate: np.ndarray = field(repr=False)


def strip_decode(strip: Strip, error: np.ndarray, p: float, eps: float = 0.0) -> StripOutcome:
    """Staged binary MinSum with decimation on the strip.

    Success means the estimate reproduces the syndrome and differs from the
    error by a contractible cycle.
    """
    error = np.asarray(error, dtype=np.uint8)
    syn = strip.syndrome(error)
    res = syn.copy()
    est = np.zeros(strip.n, np.uint8)
    total = 0
    stage = None
    for k in range(strip.K + 1):
        plan = strip._plans[k]
        out = _run_stage(strip, k, res, p, eps, stage_schedule(k), stop=True)
        total += out.iterations
        loc = out.local_estimate.x
        if out.converged or k == strip.K:
            est[plan.act] ^= loc
            stage = k if out.converged else None
            break
        rm = strip.removed(k)
        vals = loc[np.searchsorted(plan.act, rm)]
        est[rm] = vals
        res ^= (strip.H[:, rm] @ vals) & 1
    converged = bool(np.array_equal(strip.syndrome(est), syn))
    success = converged and strip.logical_parity(est ^ error) == 0
    return StripOutcome(success, converged, stage, total, est)


@dataclass(frozen=True)
class DilutionStep:
    """One application of the stage map: MP, decimation, renormalization."""

    effective_error: np.ndarray = field(repr=False)  # e^(k+1), on stage k+1
    removed: np.ndarray = field(repr=False)
    frozen: np.ndarray = field(repr=False)


def dilution_map_step(strip: Strip, k: int, error: np.ndarray, p: float = 0.05, eps: float = 0.0) -> DilutionStep:
    """Map an effective error on stage ``k`` to one on stage ``k + 1``.

    Runs ``stage_schedule(k)`` MinSum iterations against the error's
    syndrome, freezes the qubits the next stage drops, and replaces the
    residual by a minimum-weight edge set on stage ``k + 1``.
    """
    if k >= strip.K:
        raise ValueError(f"stage {k} has no successor (K={strip.K})")
    error = np.asarray(error, dtype=np.uint8)
    if np.any(error[~strip.active(k)]):
        raise ValueError("error must be supported on the stage-k graph")
    plan = strip._plans[k]
    out = _run_stage(strip, k, strip.syndrome(error), p, eps, stage_schedule(k), stop=False)
    rm = strip.removed(k)
    frozen = out.local_estimate.x[np.searchsorted(plan.act, rm)].astype(np.uint8)
    hat = np.zeros(strip.n, np.uint8)
    hat[rm] = frozen
    residual = error ^ hat
    return DilutionStep(renormalize(strip, k + 1, strip.syndrome(residual)), rm, frozen)


@dataclass(frozen=True)
class BlockExperimentResult:
    k: int
    n_B: int
    mean_output: float
    n_correct: int
    n_wrong: int
    w_corr: float
    w_wrong: float

    @property
    def samples(self) -> int:
        return self.n_correct + self.n_wrong

    def csv_fields(self) -> list[str]:
        return [str(self.k), str(self.n_B), f"{self.mean_output:.6g}", str(self.samples),
                repr(self.w_corr), repr(self.w_wrong)]


def _block_layout(strip: Strip, k: int, j: int):
    span = 2 ** (k + 1)
    rows = np.arange(j * span, (j + 1) * span)
    rails = np.concatenate([rows, strip.d + rows])
    opening = strip.rung(j * span)
    middle = strip.rung(j * span + 2**k)
    block = np.concatenate([rails, [opening, middle]])
    cell = np.concatenate([rails, [opening]])
    return block, cell, middle


def block_experiment(k: int, n_B: int, samples: int, w_corr: float = 1.0, w_wrong: float = 1.0,
                     p: float = 0.05, seed: int = 0, d: int | None = None) -> BlockExperimentResult:
    """Weighted mean effective weight a stage-``k`` block leaves in its image cell.

    Each sample places ``n_B`` errors uniformly on the block's stage-``k``
    edges inside an otherwise clean ring (length ``2**(k+3)`` by default),
    applies one dilution step and counts the effective error inside the
    stage-``k+1`` cell the block maps to.  Samples whose middle rung was
    decimated correctly get weight ``w_corr``, the rest ``w_wrong``.
    """
    d = 2 ** (k + 3) if d is None else d
    strip = Strip(d, k + 1)
    j = d // 2 ** (k + 2)
    block, cell, middle = _block_layout(strip, k, j)
    if not 0 <= n_B <= block.size:
        raise ValueError(f"n_B must lie in 0..{block.size} at stage {k}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k, n_B])))
    tot = {True: 0.0, False: 0.0}
    cnt = {True: 0, False: 0}
    for _ in range(samples):
        e = np.zeros(strip.n, np.uint8)
        e[rng.choice(block, size=n_B, replace=False)] = 1
        step = dilution_map_step(strip, k, e, p=p)
        idx = int(np.flatnonzero(step.removed == middle)[0])
        ok = bool(step.frozen[idx] == e[middle])
        tot[ok] += float(step.effective_error[cell].sum())
        cnt[ok] += 1
    denom = w_corr * cnt[True] + w_wrong * cnt[False]
    mean = (w_corr * tot[True] + w_wrong * tot[False]) / denom if denom else 0.0
    return BlockExperimentResult(k, n_B, mean, cnt[True], cnt[False], w_corr, w_wrong)


def write_block_csv(results: Iterable[BlockExperimentResult], stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BLOCK_CSV_HEADER)
    for r in results:
        w.writerow(r.csv_fields())
    return buf.getvalue() if stream is None else ""
