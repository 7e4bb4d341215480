"""Monte-Carlo sweeps over strategies, target fractions and strengths.

A sweep is a deterministic function of (graph, config): target sets and
combined-strategy draws are seeded from the master seed per
(phi, sample_id) substream, runs are enumerated in sorted key order, and
failures are isolated into a manifest instead of aborting the sweep. The
worker count changes wall time only, never output bytes.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from . import __version__ as _version
from .errors import NavsteerError, ValidationError
from .graph import WeightedDigraph
from .metrics import target_metrics
from .modify import ModificationSpec, Strategy, apply_modification, weight_budget
from .surfer import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    StationaryResult,
    lorenz_curve,
    stationary,
    transition_matrix,
)
from .targets import TargetSet, sample_target_sets, target_vector
from .util import derive_seed

logger = logging.getLogger(__name__)

# Column order of the records CSV; fixed, do not reorder.
CSV_HEADER = (
    "graph_id,strategy,phi,sample_id,b,alpha,pi_t,pi_t_prime,tau,"
    "d_in,d_out,degree_ratio,l_b,inserted_count,biased_weight,"
    "iters_before,iters_after,wall_time_ms"
)

REALISTIC_BIAS_STRENGTHS = tuple(float(b) for b in range(2, 16))
SATURATION_BIAS_STRENGTHS = (2.0, 5.0, 10.0, 20.0, 35.0, 50.0, 100.0, 150.0, 200.0)
DEFAULT_PHI_VALUES = (0.01, 0.02, 0.05, 0.1, 0.15, 0.2)
DEFAULT_ALPHA_VALUES = tuple(i / 10 for i in range(11))

_COMBINE_STREAM = "combine"


@dataclass(frozen=True)
class SweepConfig:
    """Fully resolved sweep definition (everything that affects output)."""

    graph_id: str = "graph"
    strategies: tuple[Strategy, ...] = (Strategy.CLICK_BIAS, Strategy.LINK_INSERTION)
    phi_values: tuple[float, ...] = DEFAULT_PHI_VALUES
    bias_strengths: tuple[float, ...] = REALISTIC_BIAS_STRENGTHS
    alpha_values: tuple[float, ...] = DEFAULT_ALPHA_VALUES
    samples_per_phi: int = 100
    master_seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "strategies",
                           tuple(Strategy(s) for s in self.strategies))
        if not self.strategies:
            raise ValidationError("sweep needs at least one strategy")
        if not self.phi_values or not all(0 < p <= 1 for p in self.phi_values):
            raise ValidationError("phi values must lie in (0, 1]")
        if not self.bias_strengths or not all(b >= 1 for b in self.bias_strengths):
            raise ValidationError("bias strengths must be >= 1")
        if any(not (0.0 <= a <= 1.0) for a in self.alpha_values):
            raise ValidationError("alpha values must lie in [0, 1]")
        if Strategy.COMBINED in self.strategies and not self.alpha_values:
            raise ValidationError("combined strategy needs alpha values")
        if self.samples_per_phi < 1:
            raise ValidationError("samples_per_phi must be at least 1")


@dataclass(frozen=True)
class RunRecord:
    """One (strategy, phi, sample, b[, alpha]) experiment outcome.

    ``phi`` is the requested grid value; the realized fraction follows from
    the target-set size. ``target_hash`` identifies the sampled member set
    (used to assert reuse across strategies); it is not a CSV column.
    """

    graph_id: str
    strategy: str
    phi: float
    sample_id: int
    b: float
    alpha: float | None
    pi_t: float
    pi_t_prime: float
    tau: float
    d_in: float
    d_out: float
    degree_ratio: float
    l_b: float
    inserted_count: int
    biased_weight: float
    iters_before: int
    iters_after: int
    wall_time_ms: float
    target_hash: str = ""


@dataclass(frozen=True)
class RunFailure:
    """A run that errored; the sweep continues without it."""

    graph_id: str
    strategy: str
    phi: float
    sample_id: int
    b: float
    alpha: float | None
    error: str
    message: str


@dataclass(frozen=True)
class SweepResult:
    records: list[RunRecord]
    failures: list[RunFailure]


@dataclass(frozen=True)
class BinnedSummary:
    """Mean modified energy grouped by target degree ratio."""

    method: str
    bin_edges: np.ndarray
    counts: tuple[int, ...]
    mean_energy: np.ndarray
    dropped_infinite: int
    requested_bins: int
    notice: str | None = None


def _hash_members(members: Sequence[int]) -> str:
    payload = ",".join(str(i) for i in members).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def run_single_detailed(
    g: WeightedDigraph,
    target_set: TargetSet,
    spec: ModificationSpec,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    baseline: StationaryResult | None = None,
    graph_id: str = "graph",
    phi: float | None = None,
) -> tuple[RunRecord, WeightedDigraph]:
    """Execute one full pipeline run: modify, solve, measure.

    ``baseline`` lets sweeps share the unmodified stationary solve; it must
    belong to ``g``. ``phi`` overrides the recorded fraction with the
    requested grid value. Returns the record plus the modified graph for
    callers that want to export it.
    """
    t = target_vector(target_set, g.n)
    if baseline is None:
        baseline = stationary(transition_matrix(g), tolerance, max_iterations)
    started = time.perf_counter()
    modified, budget = apply_modification(g, spec, t, baseline.pi)
    after = stationary(transition_matrix(modified), tolerance, max_iterations)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    m = target_metrics(g, t, baseline.pi, after.pi)
    record = RunRecord(
        graph_id=graph_id,
        strategy=spec.strategy.value,
        phi=target_set.phi if phi is None else phi,
        sample_id=target_set.sample_id,
        b=float(spec.bias_strength),
        alpha=spec.alpha,
        pi_t=m.energy_before,
        pi_t_prime=m.energy_after,
        tau=m.influence_potential,
        d_in=m.in_degree,
        d_out=m.out_degree,
        degree_ratio=m.degree_ratio,
        l_b=weight_budget(g, t, spec.bias_strength),
        inserted_count=budget.inserted_count,
        biased_weight=budget.biased_weight,
        iters_before=baseline.iterations,
        iters_after=after.iterations,
        wall_time_ms=elapsed_ms,
        target_hash=_hash_members(target_set.members),
    )
    return record, modified


def run_single(
    g: WeightedDigraph,
    target_set: TargetSet,
    spec: ModificationSpec,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    baseline: StationaryResult | None = None,
    graph_id: str = "graph",
    phi: float | None = None,
) -> RunRecord:
    """Like :func:`run_single_detailed` but returns only the record."""
    record, _ = run_single_detailed(
        g, target_set, spec, tolerance=tolerance, max_iterations=max_iterations,
        baseline=baseline, graph_id=graph_id, phi=phi)
    return record


# Worker-process state, set once per worker by the pool initializer so the
# graph is not re-pickled for every task.
_worker_env: dict = {}


def _init_worker(g: WeightedDigraph, baseline: StationaryResult,
                 config: SweepConfig) -> None:
    _worker_env["g"] = g
    _worker_env["baseline"] = baseline
    _worker_env["config"] = config


_Task = tuple[str, float, int, float, float | None, tuple[int, ...], int]


def _make_spec(strategy: Strategy, b: float, alpha: float | None,
               master_seed: int, phi: float, sample_id: int) -> ModificationSpec:
    if strategy is Strategy.COMBINED:
        seed = derive_seed(master_seed, _COMBINE_STREAM, float(phi),
                           sample_id, float(b), float(alpha))
        return ModificationSpec(strategy=strategy, bias_strength=b,
                                alpha=alpha, seed=seed)
    return ModificationSpec(strategy=strategy, bias_strength=b)


def _run_task(task: _Task):
    g: WeightedDigraph = _worker_env["g"]
    baseline: StationaryResult = _worker_env["baseline"]
    config: SweepConfig = _worker_env["config"]
    strategy_value, phi, sample_id, b, alpha, members, seed = task
    strategy = Strategy(strategy_value)
    ts = TargetSet(members=members, phi=len(members) / g.n,
                   sample_id=sample_id, seed=seed)
    try:
        spec = _make_spec(strategy, b, alpha, config.master_seed, phi, sample_id)
        record = run_single(
            g, ts, spec,
            tolerance=config.tolerance,
            max_iterations=config.max_iterations,
            baseline=baseline,
            graph_id=config.graph_id,
            phi=phi,
        )
        return ("ok", record)
    except Exception as exc:  # isolate the run, keep the sweep going
        failure = RunFailure(
            graph_id=config.graph_id, strategy=strategy_value, phi=phi,
            sample_id=sample_id, b=b, alpha=alpha,
            error=type(exc).__name__, message=str(exc))
        return ("failed", failure)


def _enumerate_tasks(g: WeightedDigraph, config: SweepConfig) -> list[_Task]:
    """All run keys in their canonical sorted order.

    Target sets are drawn once per (phi, sample) and reused by every
    strategy and strength, so comparisons across strategies see identical
    targets.
    """
    targets_by_phi = {
        phi: sample_target_sets(g, phi, config.samples_per_phi, config.master_seed)
        for phi in config.phi_values
    }
    tasks: list[_Task] = []
    for strategy in sorted(config.strategies, key=lambda s: s.value):
        alphas: tuple[float | None, ...]
        alphas = (tuple(sorted(config.alpha_values))
                  if strategy is Strategy.COMBINED else (None,))
        for phi in sorted(config.phi_values):
            sets = targets_by_phi[phi]
            for sample_id in range(config.samples_per_phi):
                ts = sets[sample_id]
                for b in sorted(config.bias_strengths):
                    for alpha in alphas:
                        tasks.append((strategy.value, float(phi), sample_id,
                                      float(b), alpha, ts.members, ts.seed))
    return tasks


def sweep(g: WeightedDigraph, config: SweepConfig, workers: int = 1) -> SweepResult:
    """Run the full experiment grid; returns records plus failure manifest.

    Output is identical for any ``workers`` value: substream seeds depend
    only on run keys and results are gathered in enumeration order.
    """
    if workers < 1:
        raise ValidationError("workers must be at least 1")
    baseline = stationary(transition_matrix(g), config.tolerance,
                          config.max_iterations)
    tasks = _enumerate_tasks(g, config)
    records: list[RunRecord] = []
    failures: list[RunFailure] = []
    if workers == 1:
        _init_worker(g, baseline, config)
        outcomes = map(_run_task, tasks)
    else:
        pool = concurrent.futures.ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker,
            initargs=(g, baseline, config))
        with pool:
            chunk = max(1, len(tasks) // (workers * 8))
            outcomes = list(pool.map(_run_task, tasks, chunksize=chunk))
    for status, payload in outcomes:
        if status == "ok":
            records.append(payload)
        else:
            failures.append(payload)
    if failures:
        logger.warning("%d of %d runs failed; see failure manifest",
                       len(failures), len(tasks))
    return SweepResult(records=records, failures=failures)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    return str(value)


def write_records_csv(
    records: Iterable[RunRecord],
    out: str | Path | IO[str],
    include_timing: bool = False,
) -> None:
    """Write records in the fixed CSV schema (RFC 4180, UTF-8).

    ``alpha`` is empty for pure strategies. ``wall_time_ms`` is empty
    unless ``include_timing`` is set: measured time varies run to run and
    would break the byte-for-byte reproducibility of sweep outputs.
    """
    columns = CSV_HEADER.split(",")

    def emit(fh: IO[str]) -> None:
        fh.write(CSV_HEADER + "\r\n")
        for r in records:
            row = {
                "graph_id": r.graph_id, "strategy": r.strategy, "phi": r.phi,
                "sample_id": r.sample_id, "b": r.b, "alpha": r.alpha,
                "pi_t": r.pi_t, "pi_t_prime": r.pi_t_prime, "tau": r.tau,
                "d_in": r.d_in, "d_out": r.d_out,
                "degree_ratio": r.degree_ratio, "l_b": r.l_b,
                "inserted_count": r.inserted_count,
                "biased_weight": r.biased_weight,
                "iters_before": r.iters_before, "iters_after": r.iters_after,
                "wall_time_ms": r.wall_time_ms if include_timing else None,
            }
            fields = [_csv_quote(_format_value(row[c])) for c in columns]
            fh.write(",".join(fields) + "\r\n")

    if hasattr(out, "write"):
        emit(out)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _csv_quote(field: str) -> str:
    if any(ch in field for ch in ',"\r\n'):
        return '"' + field.replace('"', '""') + '"'
    return field


def write_records_jsonl(records: Iterable[RunRecord],
                        out: str | Path | IO[str]) -> None:
    """JSON-lines record dump, one object per run, all fields included."""

    def emit(fh: IO[str]) -> None:
        for r in records:
            d = asdict(r)
            if math.isinf(d["degree_ratio"]):
                d["degree_ratio"] = "inf"
            fh.write(json.dumps(d, sort_keys=True) + "\n")

    if hasattr(out, "write"):
        emit(out)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            emit(fh)


def write_failure_manifest(failures: Iterable[RunFailure],
                           path: str | Path) -> Path:
    path = Path(path)
    failures = list(failures)
    payload = {
        "version": _version,
        "failure_count": len(failures),
        "failures": [asdict(f) for f in failures],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def bin_by_degree_ratio(
    records: Sequence[RunRecord],
    n_bins: int = 6,
    method: str = "equal_width",
) -> BinnedSummary:
    """Group runs by target degree ratio and average the modified energy.

    Rows whose ratio is flagged infinite (or undefined) are dropped and
    counted. If fewer distinct finite ratios than requested bins exist, the
    bin count shrinks to that number and the reduction is reported in the
    notice.
    """
    if n_bins < 1:
        raise ValidationError("n_bins must be at least 1")
    if method not in ("equal_width", "quantile"):
        raise ValidationError(f"unknown binning method {method!r}")
    ratios = np.array([r.degree_ratio for r in records], dtype=np.float64)
    energies = np.array([r.pi_t_prime for r in records], dtype=np.float64)
    finite = np.isfinite(ratios)
    dropped = int((~finite).sum())
    ratios, energies = ratios[finite], energies[finite]
    if ratios.size == 0:
        raise ValidationError("no finite degree ratios to bin")

    distinct = np.unique(ratios)
    notice = None
    used_bins = n_bins
    if distinct.size < n_bins:
        used_bins = int(distinct.size)
        notice = (f"only {distinct.size} distinct ratio values; "
                  f"reduced bins from {n_bins} to {used_bins}")
        logger.warning("%s", notice)

    lo, hi = float(ratios.min()), float(ratios.max())
    if method == "equal_width":
        edges = np.linspace(lo, hi, used_bins + 1)
        if hi > lo:
            idx = np.minimum(((ratios - lo) / (hi - lo) * used_bins).astype(int),
                             used_bins - 1)
        else:
            idx = np.zeros(ratios.size, dtype=int)
    else:
        edges = np.quantile(ratios, np.linspace(0.0, 1.0, used_bins + 1))
        idx = np.minimum(np.searchsorted(edges[1:-1], ratios, side="right"),
                         used_bins - 1)

    counts = np.bincount(idx, minlength=used_bins)
    sums = np.bincount(idx, weights=energies, minlength=used_bins)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return BinnedSummary(method=method, bin_edges=edges,
                         counts=tuple(int(c) for c in counts),
                         mean_energy=means, dropped_infinite=dropped,
                         requested_bins=n_bins, notice=notice)


def lorenz_report(
    g: WeightedDigraph,
    output_path: str | Path | None = None,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> np.ndarray:
    """Stationary-mass concentration curve of a graph, optionally as CSV."""
    result = stationary(transition_matrix(g), tolerance, max_iterations)
    curve = lorenz_curve(result.pi)
    if output_path is not None:
        with open(output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("node_fraction,cumulative_energy\r\n")
            for x, y in curve:
                fh.write(f"{_format_value(float(x))},{_format_value(float(y))}\r\n")
    return curve
