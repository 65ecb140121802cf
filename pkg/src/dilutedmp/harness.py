"""Monte Carlo sweeps: sample, decode, classify, tabulate.

Every trial draws its error from its own PCG64 stream keyed by
``(master_seed, d, round(p * 1e6), trial)``, so results do not depend on
worker count or scheduling.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .decoder import compile_sequence, decode, max_iteration_budget, stage_budgets
from .geometry import Family, build_surface_code, num_stages
from .mp import Mode, MpConfig, PhiMode
from .noise import NoiseKind, NoiseModel, prior_of, sample, trial_rng
from .pauli import Syndrome

__all__ = [
    "CSV_HEADER",
    "SweepSpec",
    "SweepRow",
    "TrialResult",
    "default_family",
    "default_eps",
    "parse_p_grid",
    "run_point",
    "run_sweep",
    "iteration_histogram",
    "nonconvergence_sweep",
    "write_csv",
]

CSV_HEADER = (
    "d,p,noise,pattern,eps,trials,nonconv,logical_fail,total_error_rate,"
    "mean_iters,median_iters,max_iters,seed"
).split(",")


def default_family(noise: NoiseKind) -> Family:
    """Diagonal patterns for correlated noise, Cartesian for X-only noise."""
    return Family.DV if NoiseKind.parse(noise) is NoiseKind.DEPOLARIZING else Family.CH


def default_eps(noise: NoiseKind, d: int) -> float:
    if NoiseKind.parse(noise) is NoiseKind.SINGLE_X:
        if d >= 65:
            return 0.05
        if d >= 33:
            return 0.1
    return 0.15


def parse_p_grid(text: str) -> list[float]:
    """``"0.01,0.02"`` or ``"start:stop:step"`` (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad p grid {text!r}; expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = [round(start + i * step, 12) for i in range(count)]
    else:
        grid = [float(v) for v in text.split(",") if v]
    for p in grid:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p={p} outside [0, 1]")
    return grid


@dataclass(frozen=True)
class SweepSpec:
    """What to simulate.

    Attributes:
        eps: a single damping factor, a ``{d: eps}`` map, or ``None`` for the
            per-noise defaults.
        pattern: sparsification family, or ``"auto"`` for the noise default.
        budget: per-stage iteration budgets; an int ``b`` means ``b (k + 1)``.
        dilution: ``False`` decodes on the undiluted graph only, with the
            whole ``10 (K+1)(K+2)`` budget in a single stage.
    """

    distances: tuple[int, ...]
    p_values: tuple[float, ...]
    noise: NoiseKind = NoiseKind.DEPOLARIZING
    pattern: "Family | str" = "auto"
    eps: "float | Mapping[int, float] | None" = None
    trials: int = 1000
    seed: int = 0
    mode: Mode = Mode.MINSUM
    phi_mode: PhiMode = PhiMode.MAX
    budget: "int | Sequence[int] | None" = None
    dilution: bool = True
    init_memory: str = "prior"

    def __post_init__(self):
        object.__setattr__(self, "noise", NoiseKind.parse(self.noise))
        object.__setattr__(self, "distances", tuple(int(d) for d in self.distances))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p={p} outside [0, 1]")
        if self.pattern != "auto":
            object.__setattr__(self, "pattern", Family.parse(self.pattern))

    def family(self) -> Family:
        return default_family(self.noise) if self.pattern == "auto" else self.pattern

    def eps_for(self, d: int) -> float:
        if self.eps is None:
            return default_eps(self.noise, d)
        if isinstance(self.eps, Mapping):
            return float(self.eps.get(d, default_eps(self.noise, d)))
        return float(self.eps)

    def budgets_for(self, d: int) -> tuple[int, ...]:
        K = num_stages(d)
        if not self.dilution:
            if self.budget is not None and not isinstance(self.budget, int) and len(self.budget) == 1:
                return (int(self.budget[0]),)
            total = max_iteration_budget(d) if self.budget is None else sum(self._explicit(K))
            return (total,)
        return self._explicit(K)

    def _explicit(self, K: int) -> tuple[int, ...]:
        if self.budget is None:
            return stage_budgets(K)
        if isinstance(self.budget, int):
            return stage_budgets(K, self.budget)
        b = tuple(int(v) for v in self.budget)
        if len(b) < K + 1:
            raise ValueError(f"budget lists {len(b)} stages, need {K + 1}")
        return b[: K + 1]


@dataclass(frozen=True)
class SweepRow:
    d: int
    p: float
    noise: str
    pattern: str
    eps: float
    trials: int
    nonconv: int
    logical_fail: int
    mean_iters: float
    median_iters: float
    max_iters: int
    seed: int
    wall_time: float = field(default=0.0, compare=False)
    iterations: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def total_error_rate(self) -> float:
        return (self.nonconv + self.logical_fail) / self.trials

    @property
    def nonconv_rate(self) -> float:
        return self.nonconv / self.trials

    def csv_fields(self) -> list[str]:
        return [
            str(self.d), repr(self.p), self.noise, self.pattern, repr(self.eps), str(self.trials),
            str(self.nonconv), str(self.logical_fail), f"{self.total_error_rate:.8g}",
            f"{self.mean_iters:.6g}", f"{self.median_iters:.6g}", str(self.max_iters), str(self.seed),
        ]


@dataclass(frozen=True)
class TrialResult:
    converged: bool
    logical: bool
    iterations: int
    stage: int | None


def _point_config(spec: SweepSpec, d: int) -> MpConfig:
    return MpConfig(mode=spec.mode, eps=spec.eps_for(d), phi_mode=spec.phi_mode, init_memory=spec.init_memory)


def _run_trials(spec: SweepSpec, d: int, p: float, start: int, stop: int) -> list[TrialResult]:
    code = build_surface_code(d)
    family = spec.family()
    comp = compile_sequence(d, family, None if spec.dilution else 1)
    budgets = spec.budgets_for(d)
    model = NoiseModel(spec.noise, p)
    prior = prior_of(model)
    cfg = _point_config(spec, d)
    lz = np.asarray(code.logical_z)
    lx = np.asarray(code.logical_x)
    pkey = int(round(p * 1e6))
    out = []
    for trial in range(start, stop):
        e = sample(model, code.n, trial_rng(spec.seed, d, pkey, trial))
        syn = Syndrome((code.hz @ e.x) & 1, (code.hx @ e.z) & 1)
        res = decode(code, comp, syn, prior, cfg, budgets=budgets)
        logical = False
        if res.converged:
            rx = res.estimate.x ^ e.x
            rz = res.estimate.z ^ e.z
            logical = bool((int(rx[lz].sum()) & 1) or (int(rz[lx].sum()) & 1))
        out.append(TrialResult(res.converged, logical, res.total_iterations, res.stage_of_convergence))
    return out


def _chunk_job(args):
    return _run_trials(*args)


def run_point(spec: SweepSpec, d: int, p: float, workers: int = 1, chunk: int = 2000) -> SweepRow:
    """Simulate one ``(d, p)`` point."""
    t0 = time.perf_counter()
    if workers > 1:
        jobs = [(spec, d, p, a, min(a + chunk, spec.trials)) for a in range(0, spec.trials, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_chunk_job, jobs) for r in part]
    else:
        results = _run_trials(spec, d, p, 0, spec.trials)
    iters = np.array([r.iterations for r in results], dtype=np.int64)
    nonconv = sum(1 for r in results if not r.converged)
    logical = sum(1 for r in results if r.converged and r.logical)
    conv_iters = np.array([r.iterations for r in results if r.converged], dtype=np.int64)
    return SweepRow(
        d=d,
        p=p,
        noise=spec.noise.value,
        pattern=spec.family().value if spec.dilution else f"{spec.family().value}-none",
        eps=spec.eps_for(d),
        trials=spec.trials,
        nonconv=nonconv,
        logical_fail=logical,
        mean_iters=float(iters.mean()),
        median_iters=float(np.median(conv_iters)) if conv_iters.size else float("nan"),
        max_iters=int(iters.max()),
        seed=spec.seed,
        wall_time=time.perf_counter() - t0,
        iterations=tuple(int(v) for v in iters),
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> Iterator[SweepRow]:
    """Yield one row per ``(d, p)`` in spec order, as each completes."""
    for d in spec.distances:
        for p in spec.p_values:
            yield run_point(spec, d, p, workers=workers)


def iteration_histogram(spec: SweepSpec, d: int | None = None, p: float | None = None, converged_only: bool = True):
    """Counts of total iterations for one ``(d, p)``.

    Returns ``(values, counts, stage_edges)``: the distinct iteration totals,
    their counts, and the cumulative iteration index at which each stage ends.
    """
    d = spec.distances[0] if d is None else d
    p = spec.p_values[0] if p is None else p
    results = _run_trials(spec, d, p, 0, spec.trials)
    its = [r.iterations for r in results if r.converged or not converged_only]
    values, counts = np.unique(np.asarray(its, dtype=np.int64), return_counts=True)
    edges = np.cumsum(spec.budgets_for(d))
    return values, counts, edges


def nonconvergence_sweep(d: int, p_values: Iterable[float], trials: int = 1000, seed: int = 0,
                         noise: NoiseKind = NoiseKind.DEPOLARIZING, eps_values=(0.0, 0.15),
                         workers: int = 1, **kw) -> list[SweepRow]:
    """The four dilution x damping variants at each ``p``."""
    rows = []
    for dilution in (False, True):
        for eps in eps_values:
            spec = SweepSpec((d,), tuple(p_values), noise=noise, eps=eps, trials=trials, seed=seed,
                             dilution=dilution, **kw)
            rows.extend(run_sweep(spec, workers=workers))
    return rows


def write_csv(rows: Iterable[SweepRow], stream: "io.TextIOBase | None" = None) -> str:
    """Write rows under the fixed header; returns the text when ``stream`` is None."""
    buf = io.StringIO() if stream is None else stream
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.csv_fields())
        if stream is not None:
            stream.flush()
    return buf.getvalue() if stream is None else ""
