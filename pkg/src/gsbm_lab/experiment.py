"""Seeded trials, parameter sweeps and the CSV they produce."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .generator import ModelParams, sample_gsbm
from .geometry import build_block_grid
from .phase1 import run_phase1
from .phase2 import genie_all, refine_all
from .theory import InfeasibleParameters, practical_chi, solve_parameters
from .visibility import build_visibility_graph, connected, with_schedule

log = logging.getLogger(__name__)

ESTIMATORS = ("two-phase", "genie", "phase1-only")
# occupancy threshold used when the solver has no feasible delta (below threshold)
FALLBACK_DELTA = 1e-9

CSV_COLUMNS = [
    "trial_id", "seed", "d", "lambda", "n", "a", "b", "chi", "delta",
    "n_vertices", "n_edges", "visibility_connected", "phase1_agreement",
    "final_agreement", "exact_success", "max_block_mistakes", "max_nbhd_mistakes",
    "t_generate_ms", "t_phase1_ms", "t_phase2_ms",
]  # fmt: skip


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrialPoint:
    params: ModelParams
    chi: float | None = None
    delta: float | None = None
    estimator: str = "two-phase"

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; choose from {ESTIMATORS}")


@dataclass
class TrialResult:
    seed: int
    params: ModelParams
    chi: float
    delta: float
    n_vertices: int
    n_edges: int
    visibility_connected: bool
    phase1_agreement: float
    final_agreement: float
    exact_success: bool
    max_block_mistakes: int
    max_neighborhood_mistakes: int
    runtime: dict[str, float] = field(default_factory=dict)
    derived: dict | None = None

    def row(self, trial_id: str, timings: bool = True) -> list:
        p = self.params
        t = self.runtime if timings else {}
        return [
            trial_id, self.seed, p.d, p.lam, p.n, p.a, p.b, self.chi, self.delta,
            self.n_vertices, self.n_edges, int(self.visibility_connected),
            _fmt(self.phase1_agreement), _fmt(self.final_agreement), int(self.exact_success),
            self.max_block_mistakes, self.max_neighborhood_mistakes,
            _fmt(t.get("generate", 0.0)), _fmt(t.get("phase1", 0.0)), _fmt(t.get("phase2", 0.0)),
        ]  # fmt: skip


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(round(float(x), 6))


def resolve_block_params(point: TrialPoint) -> tuple[float, float, dict | None]:
    """(chi, delta, derived-params dict or None) for a trial point.

    Explicit overrides win. Otherwise chi is the solver's practical value and
    delta the solver's delta; when the solver is infeasible the practical chi
    and ``FALLBACK_DELTA`` are used.
    """
    try:
        dp = solve_parameters(point.params)
        derived = dp.as_dict()
        chi, delta = dp.chi_practical, dp.delta
    except InfeasibleParameters:
        derived = None
        chi, delta = None, FALLBACK_DELTA
    if point.chi is not None:
        chi = point.chi
    elif chi is None:
        chi = practical_chi(point.params, delta=point.delta or FALLBACK_DELTA)
    if point.delta is not None:
        delta = point.delta
    return float(chi), float(delta), derived


def run_trial(point: TrialPoint, seed: int) -> TrialResult:
    """Sample one instance and run the selected estimator. Failures are recorded, not raised."""
    p = point.params
    chi, delta, derived = resolve_block_params(point)
    t0 = time.perf_counter()
    g = sample_gsbm(p, seed)
    t1 = time.perf_counter()
    truth = g.truth
    nan = float("nan")
    phase1_agr, max_block, max_nbhd = nan, -1, -1
    is_connected = True

    if point.estimator == "genie":
        t2 = t1
        final = genie_all(g, truth, p.a, p.b)
        t3 = time.perf_counter()
    else:
        grid = build_block_grid(g.positions, p.n, p.d, chi)
        vg = build_visibility_graph(grid, delta)
        is_connected = connected(vg)
        if not is_connected:
            t2 = time.perf_counter()
            final = np.zeros(g.num_vertices, dtype=np.int8)
            t3 = t2
        else:
            res = run_phase1(g, grid, with_schedule(vg), p)
            t2 = time.perf_counter()
            sigma_hat = res.sigma_hat
            phase1_agr = metrics.agreement(sigma_hat, truth)
            if res.root_vertex >= 0:
                occ = vg.occupied
                wrong = sigma_hat != truth[res.root_vertex] * truth
                per_block = np.bincount(grid.block_of[wrong], minlength=grid.num_blocks)
                max_block = int(per_block[occ].max()) if len(occ) else 0
                nb = metrics.neighborhood_mistakes(g, sigma_hat, truth, int(truth[res.root_vertex]))
                max_nbhd = int(nb.max()) if len(nb) else 0
            if point.estimator == "phase1-only":
                final = sigma_hat
                t3 = t2
            else:
                final = refine_all(g, sigma_hat, p.a, p.b)
                t3 = time.perf_counter()

    final_agr = metrics.agreement(final, truth) if g.num_vertices else 1.0
    return TrialResult(
        seed=int(seed),
        params=p,
        chi=chi,
        delta=delta,
        n_vertices=g.num_vertices,
        n_edges=g.num_edges,
        visibility_connected=is_connected,
        phase1_agreement=phase1_agr,
        final_agreement=final_agr,
        exact_success=bool(is_connected and final_agr == 1.0),
        max_block_mistakes=max_block,
        max_neighborhood_mistakes=max_nbhd,
        runtime={"generate": 1e3 * (t1 - t0), "phase1": 1e3 * (t2 - t1), "phase2": 1e3 * (t3 - t2)},
        derived=derived,
    )


@dataclass
class SweepConfig:
    lam: list[float]
    n: list[float]
    a: list[float]
    b: list[float]
    d: list[int]
    trials: int = 1
    seed: int = 0
    chi: float | None = None
    delta: float | None = None
    estimator: str = "two-phase"
    out: str | None = None
    timings: bool = True

    def points(self) -> list[TrialPoint]:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        pts = []
        for d, lam, n, a, b in itertools.product(self.d, self.lam, self.n, self.a, self.b):
            try:
                params = ModelParams(lam, n, a, b, d)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            pts.append(TrialPoint(params, self.chi, self.delta, self.estimator))
        return pts


def trial_seed(base: int, point_index: int, trial_index: int) -> int:
    """Per-trial seed; depends only on the three indices."""
    state = np.random.SeedSequence([base, point_index, trial_index]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) | (int(state[1]) >> 1)


def worker_count() -> int:
    cap = os.environ.get("GSBM_LAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"GSBM_LAB_THREADS must be an integer, got {cap!r}") from exc
    return n


def _run_job(job):
    point, seed = job
    return run_trial(point, seed)


def run_sweep(config: SweepConfig, workers: int | None = None) -> str:
    """Run every (grid point, trial) and return the CSV text; also written to ``config.out`` if set.

    Rows are ordered grid-major then by trial index, each point followed by a
    summary row whose ``exact_success`` column is the empirical success rate.
    """
    points = config.points()
    jobs = [
        (pt, trial_seed(config.seed, pi, ti))
        for pi, pt in enumerate(points)
        for ti in range(config.trials)
    ]
    out_path = Path(config.out) if config.out else None
    if out_path is not None:
        try:
            out_path.parent.mkdir(parents=True, exist_ok=True)
            out_path.touch()
        except OSError as exc:
            raise ConfigError(f"cannot write {out_path}: {exc}") from exc
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pi, pt in enumerate(points):
        chunk = results[pi * config.trials : (pi + 1) * config.trials]
        for ti, res in enumerate(chunk):
            w.writerow(res.row(f"p{pi}t{ti}", config.timings))
        w.writerow(_summary_row(pi, pt, chunk, config.timings))
        log.info("point %d %s: success %.3f", pi, pt.params, np.mean([r.exact_success for r in chunk]))
    text = buf.getvalue()
    if out_path is not None:
        out_path.write_text(text)
    return text


def _summary_row(pi: int, pt: TrialPoint, chunk: list[TrialResult], timings: bool) -> list:
    p = pt.params

    def mean(values):
        vals = [v for v in values if not (isinstance(v, float) and math.isnan(v))]
        return float(np.mean(vals)) if vals else float("nan")

    t = (lambda k: mean([r.runtime[k] for r in chunk])) if timings else (lambda k: 0.0)
    return [
        f"p{pi}summary", "", p.d, p.lam, p.n, p.a, p.b, chunk[0].chi, chunk[0].delta,
        _fmt(mean([r.n_vertices for r in chunk])), _fmt(mean([r.n_edges for r in chunk])),
        _fmt(mean([r.visibility_connected for r in chunk])),
        _fmt(mean([r.phase1_agreement for r in chunk])), _fmt(mean([r.final_agreement for r in chunk])),
        _fmt(mean([r.exact_success for r in chunk])),
        max(r.max_block_mistakes for r in chunk), max(r.max_neighborhood_mistakes for r in chunk),
        _fmt(t("generate")), _fmt(t("phase1")), _fmt(t("phase2")),
    ]  # fmt: skip


_LIST_KEYS = {"lambda": float, "n": float, "a": float, "b": float, "d": int}
_SCALAR_KEYS = {"trials": int, "seed": int, "chi": float, "delta": float, "estimator": str, "out": str}


def parse_config_text(text: str) -> dict[str, list[str]]:
    """``key = value`` lines; repeated keys accumulate. ``#`` starts a comment."""
    raw: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _LIST_KEYS and key not in _SCALAR_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw.setdefault(key, []).append(value)
    return raw


def build_config(file_values: dict[str, list[str]], overrides: dict[str, list[str]]) -> SweepConfig:
    """Merge file values with command-line overrides (a key given on the command line replaces the file's)."""
    merged = {**file_values, **{k: v for k, v in overrides.items() if v}}

    def conv(key, typ, value):
        try:
            return typ(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc

    kwargs = {}
    for key, typ in _LIST_KEYS.items():
        if key not in merged:
            raise ConfigError(f"missing required key {key!r}")
        values = [v for item in merged[key] for v in item.split(",") if v.strip()]
        kwargs["lam" if key == "lambda" else key] = [conv(key, typ, v.strip()) for v in values]
    for key, typ in _SCALAR_KEYS.items():
        if key in merged:
            if len(merged[key]) > 1:
                raise ConfigError(f"{key} may be given only once")
            kwargs[key] = conv(key, typ, merged[key][0])
    cfg = SweepConfig(**kwargs)
    cfg.points()  # validates
    return cfg
