"""Command-line entry point: positivity sweeps, lattice series, matching tables."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from collections.abc import Iterator
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .errors import GraphError, Infeasible, InsufficientData, SingularSystem, Unstable
from .graph_core import Graph, emit_graph6, parse_graph6
from .graph_sources import ENUMERATE, FILE, SAMPLE, SourceSpec, stream, write_graph6
from .lattice_series import (
    CHAIN,
    COORDINATION,
    SQUARE,
    coefficients_json,
    default_sizes,
    entropy_coefficients,
    free_energy_series,
    inverse_dimension_fit,
    read_dimension_table,
    virial_coefficients,
    write_coefficients_csv,
)
from .matchings import count_matchings
from .positivity import GRAPH_POSITIVITY, VIRIAL_POSITIVITY, test_graph_positivity, test_virial_positivity

log = logging.getLogger("dimerlab")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3
TESTS = {"graph-positivity": GRAPH_POSITIVITY, "virial-positivity": VIRIAL_POSITIVITY}
CONVENTIONS = {"all": 0, "k2": 2}
LATTICES = {"chain": CHAIN, "square": SQUARE}


@dataclass
class SweepRecord:
    sequence: int
    graph6: str
    v: int
    r: int
    test: str
    convention: str
    violations: list[list[int]]
    elapsed: int
    label: str | None = None


@dataclass
class Checkpoint:
    source: str
    last_sequence: int = -1
    tested: int = 0
    violators: int = 0

    def save(self, path: Path) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(asdict(self), sort_keys=True))
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: Path) -> Checkpoint | None:
        if not path.exists():
            return None
        return cls(**json.loads(path.read_text()))


def check_graph(g: Graph, test: str, min_k: int = 0):
    m = count_matchings(g)
    if test == GRAPH_POSITIVITY:
        return test_graph_positivity(m, g.r, min_k=min_k, graph_id=g.label)
    return test_virial_positivity(m, graph_id=g.label)


def _process(item: tuple[int, Graph, str, int]) -> SweepRecord:
    seq, g, test, min_k = item
    t0 = time.perf_counter()
    report = check_graph(g, test, min_k)
    elapsed = int((time.perf_counter() - t0) * 1e6)
    return SweepRecord(
        seq, emit_graph6(g).decode(), g.v, g.r, test, report.convention,
        [list(p) for p in report.violations], elapsed, g.label,
    )


def worker_count(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("DIMERLAB_THREADS")
    return max(1, int(env)) if env else 1


def run_sweep(
    graphs: Iterator[Graph],
    test: str,
    min_k: int,
    workers: int = 1,
    ordered: bool = True,
    skip_through: int = -1,
) -> Iterator[SweepRecord]:
    """Yield one record per graph; sequence numbers come from the producer."""
    items = ((seq, g, test, min_k) for seq, g in enumerate(graphs) if seq > skip_through)
    if workers <= 1:
        yield from map(_process, items)
        return
    import multiprocessing as mp

    with mp.get_context("spawn").Pool(workers) as pool:
        mapper = pool.imap if ordered else pool.imap_unordered
        yield from mapper(_process, items, chunksize=16)


def _truncate_jsonl(path: Path, last_sequence: int) -> None:
    """Keep only complete records with sequence <= last_sequence."""
    if not path.exists():
        return
    keep = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.endswith("\n"):
                break
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                break
            if rec.get("sequence", -1) <= last_sequence:
                keep.append(line)
    path.write_text("".join(keep), encoding="utf-8")


def _source_from_args(args) -> SourceSpec:
    if args.file:
        return SourceSpec(FILE, r=args.r, v=args.v, path=args.file, connected_only=bool(args.connected))
    kind = SAMPLE if args.sample else ENUMERATE
    connected = True if args.connected is None else args.connected
    return SourceSpec(kind, r=args.r, v=args.v, connected_only=connected, count=args.count, seed=args.seed)


def cmd_scan(args) -> int:
    try:
        spec = _source_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    test = TESTS[args.test]
    min_k = CONVENTIONS[args.convention] if test == GRAPH_POSITIVITY else 2
    run_id = f"{spec.digest()}:{test}:{min_k}"

    ckpt_path = Path(args.checkpoint) if args.checkpoint else None
    ckpt = Checkpoint.load(ckpt_path) if ckpt_path else None
    if ckpt is not None and ckpt.source != run_id:
        print(f"error: checkpoint {ckpt_path} belongs to a different run", file=sys.stderr)
        return EXIT_INPUT
    resuming = ckpt is not None
    ckpt = ckpt or Checkpoint(run_id)

    out_path = Path(args.output) if args.output and args.output != "-" else None
    if out_path is not None:
        if resuming:
            _truncate_jsonl(out_path, ckpt.last_sequence)
        out = open(out_path, "a" if resuming else "w", encoding="utf-8")
    else:
        out = sys.stdout

    status = EXIT_OK
    written_since = 0
    processed = 0
    try:
        records = run_sweep(
            stream(spec, force=args.force), test, min_k,
            workers=worker_count(args.workers), ordered=not args.unordered,
            skip_through=ckpt.last_sequence,
        )
        for rec in records:
            ckpt.tested += 1
            if rec.violations:
                ckpt.violators += 1
            if rec.violations or not args.violators_only:
                out.write(json.dumps(asdict(rec), sort_keys=True) + "\n")
            ckpt.last_sequence = max(ckpt.last_sequence, rec.sequence)
            processed += 1
            written_since += 1
            if ckpt_path and written_since >= args.checkpoint_every:
                out.flush()
                ckpt.save(ckpt_path)
                written_since = 0
            if args.max_records is not None and processed >= args.max_records:
                break
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_INFEASIBLE
    except (GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_INPUT
    finally:
        out.flush()
        if out is not sys.stdout:
            out.close()
        if ckpt_path and status == EXIT_OK:
            ckpt.save(ckpt_path)

    if status == EXIT_OK:
        frac = Fraction(ckpt.violators, ckpt.tested) if ckpt.tested else Fraction(0)
        print(
            f"total={ckpt.tested} violators={ckpt.violators} fraction={frac.numerator}/{frac.denominator} "
            f"test={args.test} convention=k>={min_k} connected_only={spec.connected_only}",
            file=sys.stderr,
        )
    return status


def cmd_series(args) -> int:
    family = LATTICES[args.lattice]
    sizes = tuple(args.sizes) if args.sizes else None
    try:
        f = free_energy_series(family, args.order, sizes=sizes)
    except Unstable as exc:
        print(f"error: {exc} (achievable order {exc.achievable})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (Infeasible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    r = COORDINATION[family]
    if args.target == "entropy":
        coeffs = entropy_coefficients(f, r).coefficients()
        note = f"entropy coefficients a_k, lattice={args.lattice}, r={r}, density p = 2i/v"
    else:
        coeffs = virial_coefficients(f)
        note = f"virial coefficients B_k, lattice={args.lattice}, density rho = dimers per site"
    used = sizes or default_sizes(family, args.order)
    note += f", torus sizes {used[0]} and {used[1]}"
    if args.output:
        write_coefficients_csv(args.output, coeffs, comment=note)
    if args.json or not args.output:
        print(json.dumps({"lattice": args.lattice, "target": args.target, "coefficients": coefficients_json(coeffs)}))
    positive = all(c > 0 for _, c in coeffs)
    print(
        f"{len(coeffs)} coefficients k={coeffs[0][0]}..{coeffs[-1][0]}: "
        f"{'all positive' if positive else 'NOT all positive'}",
        file=sys.stderr,
    )
    return EXIT_OK


def _graphs_from_arg(arg: str) -> Iterator[Graph]:
    path = Path(arg)
    if path.is_file():
        yield from stream(SourceSpec(FILE, path=str(path), connected_only=False))
    else:
        yield parse_graph6(arg.encode(), label="argv")


def cmd_matchings(args) -> int:
    try:
        graphs = list(_graphs_from_arg(args.graph))
    except (GraphError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for g in graphs:
        if len(graphs) > 1:
            print(f"# {g.label}")
        for i, m in enumerate(count_matchings(g).counts):
            print(f"{i} {m}")
    return EXIT_OK


def sample_stats(
    r: int, v: int, count: int, seed: int, test: str, min_k: int = 0, connected_only: bool | None = None
) -> dict:
    """Fraction of sampled graphs passing ``test`` with a Wilson 95% interval.

    ``connected_only=None`` means connected graphs except for r = 1, whose
    only graph (a perfect matching) is disconnected once v > 2.
    """
    from scipy.stats import binomtest

    if connected_only is None:
        connected_only = r > 1
    spec = SourceSpec(SAMPLE, r=r, v=v, count=count, seed=seed, connected_only=connected_only)
    ok = sum(1 for g in stream(spec) if check_graph(g, test, min_k).satisfied)
    frac = Fraction(ok, count)
    ci = binomtest(ok, count).proportion_ci(confidence_level=0.95, method="wilson")
    return {
        "r": r, "v": v, "count": count, "seed": seed, "test": test,
        "convention": f"k>={min_k}", "connected_only": connected_only,
        "satisfying": ok, "fraction": f"{frac.numerator}/{frac.denominator}",
        "ci95": [ci.low, ci.high], "ci_method": "wilson",
    }


def cmd_sample_stats(args) -> int:
    test = TESTS[args.test]
    min_k = CONVENTIONS[args.convention] if test == GRAPH_POSITIVITY else 2
    try:
        summary = sample_stats(args.r, args.v, args.count, args.seed, test, min_k, args.connected)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_census(args) -> int:
    spec = SourceSpec(ENUMERATE, r=args.r, v=args.v, connected_only=args.connected is not False)
    try:
        count = write_graph6(stream(spec, force=args.force), args.output)
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"wrote {count} graphs to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        fit = inverse_dimension_fit(args.s, read_dimension_table(args.table))
    except (SingularSystem, InsufficientData, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({
        "s": fit.s,
        "coefficients": [{"j": j, "numerator": c.numerator, "denominator": c.denominator}
                         for j, c in sorted(fit.coefficients.items())],
        "vanishing": fit.vanishing, "j_min": fit.j_min,
        "exact": fit.exact, "consistent": fit.consistent,
    }))
    return EXIT_OK


def _add_connectivity(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--connected", dest="connected", action="store_true", default=None,
                   help="connected graphs only (default for enumerate/sample)")
    g.add_argument("--all-graphs", dest="connected", action="store_false",
                   help="include disconnected graphs (default for --file)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimerlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="test a stream of graphs for graph or virial positivity")
    src = scan.add_mutually_exclusive_group(required=True)
    src.add_argument("--enumerate", action="store_true")
    src.add_argument("--sample", action="store_true")
    src.add_argument("--file", metavar="GRAPH6_FILE")
    scan.add_argument("--r", type=int)
    scan.add_argument("--v", type=int)
    scan.add_argument("--count", type=int, default=1)
    scan.add_argument("--seed", type=int, default=0)
    _add_connectivity(scan)
    scan.add_argument("--test", choices=sorted(TESTS), default="graph-positivity")
    scan.add_argument("--convention", choices=sorted(CONVENTIONS), default="all",
                      help="graph positivity k-range: all (k >= 0) or k2 (k >= 2)")
    scan.add_argument("--output", "-o", help="JSONL report path (default: stdout)")
    scan.add_argument("--violators-only", action="store_true")
    scan.add_argument("--workers", type=int, help="worker processes (default: $DIMERLAB_THREADS or 1)")
    scan.add_argument("--unordered", action="store_true", help="write records as workers finish")
    scan.add_argument("--checkpoint", help="checkpoint file; an existing one is resumed")
    scan.add_argument("--checkpoint-every", type=int, default=100)
    scan.add_argument("--max-records", type=int, help="stop after this many records (resumable)")
    scan.add_argument("--force", action="store_true", help="enumerate beyond the documented size limits")
    scan.set_defaults(func=cmd_scan)

    series = sub.add_parser("series", help="entropy or virial coefficients of a lattice")
    series.add_argument("--lattice", choices=sorted(LATTICES), required=True)
    series.add_argument("--order", type=int, required=True)
    series.add_argument("--target", choices=["entropy", "virial"], default="entropy")
    series.add_argument("--sizes", type=int, nargs=2, metavar=("L1", "L2"))
    series.add_argument("--output", "-o", help="CSV path (columns k, numerator, denominator)")
    series.add_argument("--json", action="store_true", help="also print JSON to stdout")
    series.set_defaults(func=cmd_series)

    mt = sub.add_parser("matchings", help="print i, m_i for a graph6 string or file")
    mt.add_argument("graph")
    mt.set_defaults(func=cmd_matchings)

    ss = sub.add_parser("sample-stats", help="fraction of random graphs satisfying a positivity test")
    ss.add_argument("--r", type=int, required=True)
    ss.add_argument("--v", type=int, required=True)
    ss.add_argument("--count", type=int, required=True)
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--test", choices=sorted(TESTS), default="graph-positivity")
    ss.add_argument("--convention", choices=sorted(CONVENTIONS), default="all")
    _add_connectivity(ss)
    ss.set_defaults(func=cmd_sample_stats)

    cen = sub.add_parser("census", help="write an enumerated census as graph6")
    cen.add_argument("--r", type=int, required=True)
    cen.add_argument("--v", type=int, required=True)
    cen.add_argument("--output", "-o", required=True)
    cen.add_argument("--force", action="store_true")
    _add_connectivity(cen)
    cen.set_defaults(func=cmd_census)

    fit = sub.add_parser("fit", help="fit a_s(d) = sum_j c_j / d^j from a CSV table (d, numerator, denominator)")
    fit.add_argument("--s", type=int, required=True)
    fit.add_argument("--table", required=True)
    fit.set_defaults(func=cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
