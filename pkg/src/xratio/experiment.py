"""Randomized discrepancy experiments and the surplus-3 counterexample search.

Instance ``i`` of a run with seed ``s`` is generated from ``mix_seed(s, i)``,
so a run is a pure function of its config no matter how the instances are
scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Callable, Iterable, Iterator
from xml.sax.saxutils import escape

from .degree import DegreeTimeout, cross_ratio_degree
from .hypergraph import Hypergraph, edges_to_plain, random_hypergraph
from .matching import min_matching_bound, surplus

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentSummary",
    "ExperimentIncomplete",
    "InvariantViolation",
    "Counterexample",
    "mix_seed",
    "evaluate_instance",
    "run_experiment",
    "summarize",
    "records_to_csv",
    "records_from_csv",
    "search_sigma3_zero_degree",
    "search_exhaustive",
    "render_histogram",
]

CSV_HEADER = (
    "counter,instance_seed,n,edges,degree,min_bound,delta,surplus,degree_micros,bound_micros"
)
_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, counter: int) -> int:
    """SplitMix64 finalizer applied to ``seed + (counter + 1) * golden_gamma``."""
    z = (seed + (counter + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class InvariantViolation(AssertionError):
    """A sampled instance broke the matching bound or the surplus criterion."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    samples: int
    seed: int = 0
    filter: str = "bound_positive"
    max_attempts: int | None = None
    parallelism: int = 1
    timeout: float | None = 60.0

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(f"n must be at least 5, got {self.n}")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.filter not in ("bound_positive", "none"):
            raise ValueError(f"unknown filter {self.filter!r}")
        if self.max_attempts is not None and self.max_attempts < self.samples:
            raise ValueError("max_attempts must be at least samples")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")

    @property
    def attempt_cap(self) -> int:
        return self.max_attempts if self.max_attempts is not None else 1000 * self.samples


@dataclass
class ExperimentRecord:
    counter: int
    instance_seed: int
    n: int
    edges: str
    degree: int
    min_bound: int
    delta: int
    surplus: int
    degree_micros: int | None = None
    bound_micros: int | None = None

    @property
    def hypergraph(self) -> Hypergraph:
        return Hypergraph(self.n, [map(int, e.split()) for e in self.edges.split(";") if e])


@dataclass
class ExperimentSummary:
    accepted: int
    attempts: int
    tight_fraction: float
    mean_degree: float
    mean_min_bound: float
    delta_histogram: dict[int, int]
    skipped: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["delta_histogram"] = {str(k): v for k, v in sorted(self.delta_histogram.items())}
        d["acceptance_rate"] = self.acceptance_rate
        return d


class ExperimentIncomplete(RuntimeError):
    """The attempt budget ran out before enough samples were accepted."""

    def __init__(self, message: str, records: list[ExperimentRecord], summary: ExperimentSummary):
        super().__init__(message)
        self.records = records
        self.summary = summary


# --------------------------------------------------------------------------
# one instance


def evaluate_instance(
    n: int, seed: int, counter: int, filter: str = "bound_positive", timeout: float | None = None
) -> tuple[str, object]:
    """Generate and evaluate instance ``counter``.

    Returns ``("rejected", None)``, ``("skipped", info)`` on a degree timeout,
    or ``("accepted", record)``.  Invariant failures raise.
    """
    instance_seed = mix_seed(seed, counter)
    h = random_hypergraph(n, instance_seed)
    t0 = time.perf_counter()
    report = min_matching_bound(h)
    bound_micros = round((time.perf_counter() - t0) * 1e6)
    if (report.min_bound > 0) != (report.surplus == 3):
        raise InvariantViolation(
            f"surplus criterion fails on {h}: min bound {report.min_bound}, surplus {report.surplus}"
        )
    if filter == "bound_positive" and report.min_bound == 0:
        return "rejected", None
    t0 = time.perf_counter()
    try:
        degree = cross_ratio_degree(h, timeout=timeout)
    except DegreeTimeout:
        return "skipped", {"counter": counter, "instance_seed": instance_seed, "edges": edges_to_plain(h)}
    degree_micros = round((time.perf_counter() - t0) * 1e6)
    if degree > report.min_bound:
        raise InvariantViolation(f"degree {degree} exceeds matching bound {report.min_bound} on {h}")
    return "accepted", ExperimentRecord(
        counter=counter,
        instance_seed=instance_seed,
        n=n,
        edges=edges_to_plain(h),
        degree=degree,
        min_bound=report.min_bound,
        delta=degree - report.min_bound,
        surplus=report.surplus,
        degree_micros=degree_micros,
        bound_micros=bound_micros,
    )


def _evaluate_batch(args) -> list[tuple[str, object]]:
    n, seed, counters, filter, timeout = args
    return [evaluate_instance(n, seed, c, filter, timeout) for c in counters]


def _outcomes(cfg: ExperimentConfig) -> Iterator[tuple[str, object]]:
    """Outcomes in counter order; parallel runs evaluate ahead in batches."""
    cap = cfg.attempt_cap
    if cfg.parallelism == 1:
        for c in range(cap):
            yield evaluate_instance(cfg.n, cfg.seed, c, cfg.filter, cfg.timeout)
        return
    batch = 8
    with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
        start = 0
        while start < cap:
            stop = min(cap, start + batch * cfg.parallelism * 4)
            jobs = [
                (cfg.n, cfg.seed, range(lo, min(stop, lo + batch)), cfg.filter, cfg.timeout)
                for lo in range(start, stop, batch)
            ]
            for chunk in pool.map(_evaluate_batch, jobs):
                yield from chunk
            start = stop


def summarize(
    records: list[ExperimentRecord],
    attempts: int | None = None,
    skipped: list[dict] | None = None,
    wall_time: float = 0.0,
) -> ExperimentSummary:
    accepted = len(records)
    hist = Counter(-r.delta for r in records)
    degree_total = sum(r.degree for r in records)
    bound_total = sum(r.min_bound for r in records)
    return ExperimentSummary(
        accepted=accepted,
        attempts=attempts if attempts is not None else accepted,
        tight_fraction=hist[0] / accepted if accepted else 0.0,
        mean_degree=degree_total / accepted if accepted else 0.0,
        mean_min_bound=bound_total / accepted if accepted else 0.0,
        delta_histogram=dict(sorted(hist.items())),
        skipped=list(skipped or []),
        wall_time=wall_time,
    )


def run_experiment(
    cfg: ExperimentConfig, progress: Callable[[int, int], None] | None = None
) -> tuple[list[ExperimentRecord], ExperimentSummary]:
    """Sample until ``cfg.samples`` instances are accepted.

    Rejected and timed-out instances still consume their counter.  Raises
    :class:`ExperimentIncomplete`, carrying the partial results, when the
    attempt cap is reached first.
    """
    start = time.perf_counter()
    records: list[ExperimentRecord] = []
    skipped: list[dict] = []
    attempts = 0
    for status, payload in _outcomes(cfg):
        attempts += 1
        if status == "accepted":
            records.append(payload)  # type: ignore[arg-type]
            if progress is not None:
                progress(len(records), attempts)
        elif status == "skipped":
            skipped.append(payload)  # type: ignore[arg-type]
        if len(records) == cfg.samples:
            break
    summary = summarize(records, attempts, skipped, time.perf_counter() - start)
    if len(records) < cfg.samples:
        raise ExperimentIncomplete(
            f"accepted {len(records)} of {cfg.samples} samples in {attempts} attempts",
            records,
            summary,
        )
    return records, summary


# --------------------------------------------------------------------------
# CSV


def records_to_csv(records: Iterable[ExperimentRecord], include_timings: bool = False) -> str:
    """CSV text.  Timing columns stay empty unless ``include_timings``, keeping output reproducible."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in records:
        timings = [r.degree_micros, r.bound_micros] if include_timings else ["", ""]
        writer.writerow(
            [r.counter, r.instance_seed, r.n, r.edges, r.degree, r.min_bound, r.delta, r.surplus, *timings]
        )
    return buf.getvalue()


def records_from_csv(text: str) -> list[ExperimentRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or ",".join(reader.fieldnames) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def opt(x: str) -> int | None:
        return int(x) if x else None

    return [
        ExperimentRecord(
            counter=int(row["counter"]),
            instance_seed=int(row["instance_seed"]),
            n=int(row["n"]),
            edges=row["edges"],
            degree=int(row["degree"]),
            min_bound=int(row["min_bound"]),
            delta=int(row["delta"]),
            surplus=int(row["surplus"]),
            degree_micros=opt(row["degree_micros"]),
            bound_micros=opt(row["bound_micros"]),
        )
        for row in reader
    ]


# --------------------------------------------------------------------------
# counterexample search


@dataclass
class Counterexample:
    counter: int | None
    instance_seed: int | None
    hypergraph: Hypergraph


def _confirm(h: Hypergraph) -> bool:
    # re-derived from scratch so a hit never rests on a single computation
    return surplus(h) == 3 and cross_ratio_degree(h) == 0


def search_sigma3_zero_degree(
    n: int, samples: int, seed: int, *, max_attempts: int | None = None
) -> list[Counterexample]:
    """Random hypergraphs with surplus 3 but degree 0.

    Draws until ``samples`` surplus-3 instances have been checked or
    ``max_attempts`` (default ``1000 * samples``) draws are used up.
    """
    if n < 5:
        raise ValueError(f"n must be at least 5, got {n}")
    cap = max_attempts if max_attempts is not None else 1000 * samples
    found: list[Counterexample] = []
    checked = 0
    for counter in range(cap):
        if checked == samples:
            break
        instance_seed = mix_seed(seed, counter)
        h = random_hypergraph(n, instance_seed)
        if surplus(h) != 3:
            continue
        checked += 1
        if cross_ratio_degree(h) == 0 and _confirm(h):
            found.append(Counterexample(counter, instance_seed, h))
    return found


def all_balanced_hypergraphs(n: int) -> Iterator[Hypergraph]:
    """Every multiset of ``n - 3`` 4-subsets of ``1..n``."""
    quads = list(combinations(range(1, n + 1), 4))
    for edges in combinations_with_replacement(quads, n - 3):
        yield Hypergraph(n, edges)


def search_exhaustive(n: int) -> list[Counterexample]:
    """Exhaustive version of the search; practical for ``n <= 7``."""
    return [
        Counterexample(None, None, h)
        for h in all_balanced_hypergraphs(n)
        if surplus(h) == 3 and cross_ratio_degree(h) == 0 and _confirm(h)
    ]


# --------------------------------------------------------------------------
# histogram rendering


def render_histogram(summary: ExperimentSummary, format: str = "text", width: int = 60) -> bytes:
    """Bar chart of ``bound - degree`` buckets, ascending."""
    if summary.accepted < 1:
        raise ValueError("nothing to plot")
    buckets = sorted(summary.delta_histogram.items())
    peak = max(c for _, c in buckets)
    if format == "text":
        lines = [f"bound - degree (n accepted = {summary.accepted})"]
        for gap, count in buckets:
            bar = "#" * round(width * count / peak)
            lines.append(f"{gap:>4} | {bar} {count}")
        return ("\n".join(lines) + "\n").encode()
    if format == "svg":
        return _svg(buckets, peak, summary.accepted).encode()
    raise ValueError(f"unknown histogram format {format!r}")


def _svg(buckets: list[tuple[int, int]], peak: int, accepted: int) -> str:
    bar_w, gap_w, plot_h, margin = 32, 8, 200, 40
    total_w = margin * 2 + len(buckets) * (bar_w + gap_w)
    total_h = plot_h + margin * 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'viewBox="0 0 {total_w} {total_h}">',
        f'<title>{escape(f"bound - degree, {accepted} samples")}</title>',
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{total_w - margin}" '
        f'y2="{margin + plot_h}" stroke="black"/>',
    ]
    for i, (gap, count) in enumerate(buckets):
        h = math.ceil(plot_h * count / peak) if count else 0
        x = margin + i * (bar_w + gap_w) + gap_w // 2
        y = margin + plot_h - h
        parts += [
            f'<rect x="{x}" y="{y}" width="{bar_w}" height="{h}" fill="steelblue">'
            f"<title>{gap}: {count}</title></rect>",
            f'<text x="{x + bar_w // 2}" y="{y - 4}" font-size="11" text-anchor="middle">{count}</text>',
            f'<text x="{x + bar_w // 2}" y="{margin + plot_h + 14}" font-size="11" '
            f'text-anchor="middle">{gap}</text>',
        ]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def worker_count(default: int = 1) -> int:
    """Worker count, overridable through ``XRATIO_THREADS``."""
    raw = os.environ.get("XRATIO_THREADS")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"XRATIO_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)
