"""Command-line interface.

Exit codes: 0 success, 1 mathematical disagreement, 2 input error, 3 I/O
error, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .cohomology import cohomology_bound
from .degree import DegreeTimeout, cross_ratio_degree
from .experiment import (
    ExperimentConfig,
    ExperimentIncomplete,
    InvariantViolation,
    records_to_csv,
    render_histogram,
    run_experiment,
    search_exhaustive,
    search_sigma3_zero_degree,
    worker_count,
)
from .hypergraph import (
    Hypergraph,
    HypergraphError,
    VertexTriple,
    all_triples,
    delete_vertices,
    incidence_matrix,
    parse_hypergraph,
    serialize_hypergraph,
)
from .matching import (
    MAX_ENUMERATION_SIZE,
    bregman_minc,
    enumerate_perfect_matchings,
    hall_criterion,
    min_matching_bound,
    permanent,
    surplus,
    uniform_bounds,
)

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_input(path: str, fmt: str | None) -> Hypergraph:
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc
    if fmt is None:
        fmt = "json" if data.lstrip().startswith(b"{") else "plain"
    try:
        return parse_hypergraph(data, fmt)
    except HypergraphError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from exc


def _require_balanced(h: Hypergraph) -> None:
    if not h.is_balanced():
        raise CliError(
            f"hypergraph has {h.num_edges} edges on {h.n} vertices; need n - 3 = {h.n - 3}",
            EXIT_INPUT,
        )


def _triples(h: Hypergraph, text: str | None) -> list[VertexTriple]:
    if text is None:
        return all_triples(h.n)
    try:
        return [VertexTriple.parse(text, h.n)]
    except HypergraphError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


def _emit(args, payload: dict, text: str) -> None:
    out = json.dumps(payload, sort_keys=True) + "\n" if args.json else text
    if args.output and args.command in ("degree", "bound", "surplus", "verify"):
        _write_atomic(Path(args.output), out.encode())
    else:
        sys.stdout.write(out)


def _write_atomic(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


# --------------------------------------------------------------------------
# subcommands


def cmd_degree(args) -> int:
    h = _read_input(args.input, args.format)
    try:
        d = cross_ratio_degree(h, timeout=args.timeout)
    except DegreeTimeout as exc:
        raise CliError(str(exc), EXIT_BUDGET) from exc
    _emit(args, {"degree": d}, f"{d}\n")
    return EXIT_OK


def cmd_bound(args) -> int:
    h = _read_input(args.input, args.format)
    _require_balanced(h)
    if args.triple:
        t = _triples(h, args.triple)[0]
        b = permanent(delete_vertices(incidence_matrix(h), t).entries)
        _emit(args, {"triple": list(t), "bound": b}, f"{b}\n")
        return EXIT_OK
    r = min_matching_bound(h)
    payload = {
        "min_bound": r.min_bound,
        "argmin_triples": [list(t) for t in r.argmin_triples],
        "surplus": r.surplus,
        "bregman_minc_at_argmin": r.bregman_minc_at_argmin,
        "uniform_bound_24": r.uniform_bound_24,
        "uniform_bound_pow2": r.uniform_bound_pow2,
    }
    text = (
        f"min bound        {r.min_bound}\n"
        f"argmin triples   {' '.join('{' + str(t) + '}' for t in r.argmin_triples)}\n"
        f"surplus          {r.surplus}\n"
        f"Bregman-Minc     {r.bregman_minc_at_argmin:.6g}\n"
        f"uniform bounds   {r.uniform_bound_24:.6g}  {r.uniform_bound_pow2}\n"
    )
    _emit(args, payload, text)
    return EXIT_OK


def cmd_surplus(args) -> int:
    h = _read_input(args.input, args.format)
    if h.num_edges == 0:
        raise CliError("surplus needs at least one edge", EXIT_INPUT)
    s = surplus(h)
    hall = s == 3
    _emit(args, {"surplus": s, "hall": hall}, f"{s}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    h = _read_input(args.input, args.format)
    _require_balanced(h)
    inc = incidence_matrix(h)
    rows = []
    disagreements = 0
    for t in _triples(h, args.triple):
        reduced = delete_vertices(inc, t).entries
        perm = permanent(reduced)
        cohom = cohomology_bound(h, t)
        enum = len(enumerate_perfect_matchings(reduced)) if h.num_edges <= MAX_ENUMERATION_SIZE else None
        agree = perm == cohom and (enum is None or enum == perm)
        disagreements += not agree
        rows.append(
            {
                "triple": list(t),
                "permanent": perm,
                "cohomology": cohom,
                "enumeration": enum,
                "bregman_minc": bregman_minc(h, t),
                "agree": agree,
            }
        )
    try:
        d = cross_ratio_degree(h, timeout=args.timeout)
    except DegreeTimeout as exc:
        raise CliError(str(exc), EXIT_BUDGET) from exc
    s = surplus(h)
    bound = min(r["permanent"] for r in rows)
    u24, u2 = uniform_bounds(h.n)
    # the flag compares the degree with the smallest bound among the reported triples
    flag = "TIGHT" if d == bound else f"GAP {bound - d}"
    payload = {
        "triples": rows,
        "degree": d,
        "min_bound": bound,
        "surplus": s,
        "hall": s == 3,
        "uniform_bound_24": u24,
        "uniform_bound_pow2": u2,
        "flag": flag,
        "disagreements": disagreements,
    }
    lines = [f"{'triple':<12}{'permanent':>10}{'cohomology':>11}{'enumeration':>12}{'Bregman-Minc':>14}"]
    for r in rows:
        enum = "-" if r["enumeration"] is None else str(r["enumeration"])
        mark = "" if r["agree"] else "  DISAGREE"
        lines.append(
            f"{'{' + ','.join(map(str, r['triple'])) + '}':<12}{r['permanent']:>10}"
            f"{r['cohomology']:>11}{enum:>12}{r['bregman_minc']:>14.4f}{mark}"
        )
    lines += [
        f"degree           {d}",
        f"min bound        {bound}",
        f"surplus          {s}",
        f"uniform bounds   {u24:.6g}  {u2}",
        flag,
    ]
    _emit(args, payload, "\n".join(lines) + "\n")
    if disagreements:
        print(f"error: methods disagree on {disagreements} triple(s)", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        n=args.n,
        samples=args.samples,
        seed=args.seed,
        filter=args.filter,
        max_attempts=args.max_attempts,
        parallelism=worker_count(args.workers),
        timeout=args.timeout,
    )
    prefix = Path(args.output or f"xratio-n{cfg.n}-seed{cfg.seed}")
    code = EXIT_OK
    try:
        records, summary = run_experiment(cfg)
    except ExperimentIncomplete as exc:
        records, summary = exc.records, exc.summary
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    _write_atomic(prefix.with_suffix(".csv"), records_to_csv(records, args.timings).encode())
    payload = {
        "config": {
            "n": cfg.n,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "filter": cfg.filter,
            "max_attempts": cfg.attempt_cap,
            "timeout": cfg.timeout,
        },
        "version": __version__,
        **summary.to_dict(),
    }
    if not args.timings:
        payload.pop("wall_time")
    _write_atomic(prefix.with_suffix(".json"), (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode())
    if args.histogram and summary.accepted:
        ext = ".svg" if args.histogram == "svg" else ".txt"
        _write_atomic(prefix.with_suffix(ext), render_histogram(summary, args.histogram))
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stdout.write(
            f"accepted         {summary.accepted} / {summary.attempts} attempts\n"
            f"tight fraction   {summary.tight_fraction:.4f}\n"
            f"mean degree      {summary.mean_degree:.4f}\n"
            f"skipped          {len(summary.skipped)}\n"
        )
        sys.stdout.write(render_histogram(summary, "text").decode() if summary.accepted else "")
    return code


def cmd_search(args) -> int:
    if args.exhaustive:
        hits = search_exhaustive(args.n)
    else:
        hits = search_sigma3_zero_degree(args.n, args.samples, args.seed)
    payload = {
        "n": args.n,
        "counterexamples": [
            {
                "counter": c.counter,
                "instance_seed": c.instance_seed,
                "hypergraph": json.loads(serialize_hypergraph(c.hypergraph)),
            }
            for c in hits
        ],
    }
    if hits:
        path = Path(args.output or f"xratio-counterexamples-n{args.n}-seed{args.seed}.json")
        _write_atomic(path, (json.dumps(payload, indent=2) + "\n").encode())
        print(f"warning: {len(hits)} surplus-3 hypergraph(s) with degree 0 saved to {path}", file=sys.stderr)
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    elif hits:
        for c in hits:
            sys.stdout.write(serialize_hypergraph(c.hypergraph).decode() + "\n")
    else:
        sys.stdout.write("no counterexamples found\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xratio", description="Cross-ratio degrees of 4-uniform hypergraphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("-i", "--input", required=True, help="hypergraph file, or - for stdin")
            p.add_argument("--format", choices=("json", "plain"), help="input format (default: sniff)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("-o", "--output", help="output path (prefix for experiment)")

    p = sub.add_parser("degree", help="cross-ratio degree")
    common(p)
    p.add_argument("--timeout", type=float, help="seconds before giving up")
    p.set_defaults(func=cmd_degree)

    p = sub.add_parser("bound", help="matching bound (minimized unless --triple)")
    common(p)
    p.add_argument("--triple", help="v1,v2,v3")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("surplus", help="surplus of the incidence graph")
    common(p)
    p.set_defaults(func=cmd_surplus)

    p = sub.add_parser("verify", help="cross-check all bound computations")
    common(p)
    p.add_argument("--triple", help="v1,v2,v3 (default: every triple)")
    p.add_argument("--timeout", type=float, help="seconds allowed for the degree")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="random discrepancy experiment")
    common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--filter", choices=("bound_positive", "none"), default="bound_positive")
    p.add_argument("--max-attempts", type=int)
    p.add_argument("--timeout", type=float, default=60.0, help="per-instance degree budget in seconds")
    p.add_argument("--histogram", choices=("text", "svg"))
    p.add_argument("--workers", type=int, default=1, help="worker processes (XRATIO_THREADS overrides)")
    p.add_argument("--timings", action="store_true", help="record timings (output no longer reproducible)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("search", help="look for surplus-3 hypergraphs of degree 0")
    common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true", help="enumerate every hypergraph instead of sampling")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
