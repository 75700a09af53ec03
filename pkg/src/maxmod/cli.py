"""``maxmod``: exact modularity maximization from the command line.

Exit codes: 0 success, 2 usage or bad option value, 3 unreadable or malformed input, 4 budget
exhausted, 5 validation failure (bad .td, AECP instance or witness),
6 score requested on an edgeless graph, 7 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import connsub, gadget, oracle, twdp, vcsolver
from .formats import (
    format_edge_list,
    format_metadata,
    parse_partition,
    read_graph,
    td_from_text,
    td_to_text,
)
from .graph import (
    BudgetExceeded,
    EdgelessGraphError,
    Graph,
    GraphError,
    PartitionError,
    ScaledScore,
    canonical_partition,
    deficit,
    partition_masks,
    score_masks,
    score_partition,
    strip_isolated,
    tw_degree_lower_bound,
)
from .treedecomp import TDFormatError, heuristic_decompose, validate

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET, EXIT_INVALID, EXIT_EDGELESS, EXIT_INTERNAL = 0, 2, 3, 4, 5, 6, 7
METHODS = ("auto", "brute", "tw", "tw-approx", "connsub", "vc")
SCHEMA = 1

# auto-method thresholds
AUTO_BRUTE_N = 10
AUTO_VC_COVER = 8
AUTO_TW_WIDTH = 4
AUTO_CONNSUB_PROBE = 1_000_000
AUTO_EPSILON = 0.1


class ValidationFailure(Exception):
    pass


def decimal12(f: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 60
        return str((Decimal(f.numerator) / Decimal(f.denominator)).quantize(Decimal("1e-12")))


def score_fields(q: ScaledScore) -> dict:
    f = q.fraction
    return {"numerator": q.num, "denominator": q.scale, "fraction": f"{f.numerator}/{f.denominator}",
            "decimal": decimal12(f)}


def _label_key(label: str):
    return (0, int(label), "") if label.isdigit() else (1, 0, label)


def partition_labels(G: Graph, partition) -> list:
    parts = [sorted((G.labels[v] for v in p), key=_label_key) for p in partition]
    return sorted(parts, key=lambda p: _label_key(p[0]))


# ---------------------------------------------------------------------------
# solve

def choose_method(G: Graph, args, log: list) -> str:
    H, _ = strip_isolated(G)
    if G.n <= AUTO_BRUTE_N:
        log.append(f"n={G.n} <= {AUTO_BRUTE_N}: brute")
        return "brute"
    cover = vcsolver.min_vertex_cover(H, AUTO_VC_COVER)
    if cover is not None:
        log.append(f"vertex cover {len(cover)} <= {AUTO_VC_COVER}: vc")
        return "vc"
    log.append(f"vertex cover > {AUTO_VC_COVER}")
    width = heuristic_decompose(H, "min-fill").width if H.n else 0
    if width <= AUTO_TW_WIDTH:
        log.append(f"heuristic width {width} <= {AUTO_TW_WIDTH}: tw")
        return "tw"
    log.append(f"heuristic width {width} > {AUTO_TW_WIDTH}")
    try:
        h = connsub.count_connected_subgraphs(H, min(AUTO_CONNSUB_PROBE, args.cap_subgraphs))
        log.append(f"connected subgraphs h={h} <= {AUTO_CONNSUB_PROBE}: connsub")
        return "connsub"
    except BudgetExceeded:
        log.append(f"connected subgraphs exceed {AUTO_CONNSUB_PROBE}: tw-approx with epsilon {AUTO_EPSILON}")
        if args.epsilon is None:
            args.epsilon = AUTO_EPSILON
        return "tw-approx"


def run_solver(G: Graph, method: str, args, td):
    if method == "brute":
        if args.max_parts:
            return oracle.brute_force_bounded(G, args.max_parts)
        return oracle.brute_force(G)
    if method == "tw":
        if args.max_parts:
            return twdp.solve_bounded(G, args.max_parts, td, seed=args.seed, budget=args.cap_states)
        return twdp.solve_exact(G, td, seed=args.seed, budget=args.cap_states)
    if method == "tw-approx":
        eps = args.epsilon if args.epsilon is not None else AUTO_EPSILON
        return twdp.approximate(G, eps, td, seed=args.seed, budget=args.cap_states)
    if method == "connsub":
        return connsub.solve(G, args.cap_subgraphs)
    if method == "vc":
        return vcsolver.solve(G, budget=args.cap_states)
    raise ValueError(method)


def cmd_solve(args) -> dict:
    G = read_graph(args.graph)
    td = td_from_text(Path(args.td).read_text(), G) if args.td else None
    if td is not None:
        problems = validate(G, td)
        if problems:
            raise ValidationFailure("invalid tree decomposition: " + "; ".join(problems))
    log: list = []
    method = args.method
    if method == "auto":
        method = choose_method(G, args, log)
    t0 = time.perf_counter()
    sol = run_solver(G, method, args, td)
    elapsed = time.perf_counter() - t0
    warnings = []
    if G.m == 0:
        warnings.append("edgeless graph: q* = 1 by convention")
    else:
        masks = partition_masks(G, sol.partition)
        if score_masks(G, masks) != sol.q.num:
            raise AssertionError("rescored partition disagrees with the reported value")
    counters = {k: v for k, v in sol.stats.items() if k != "rgs"}
    report = {"schema": SCHEMA, "command": "solve", "method": sol.method, "n": G.n, "m": G.m,
              **score_fields(sol.q), "partition": partition_labels(G, sol.partition),
              "seconds": round(elapsed, 6), "counters": counters, "warnings": warnings}
    if log:
        report["auto"] = log
    return report


# ---------------------------------------------------------------------------
# score / stats / decompose / validate-td

def cmd_score(args) -> dict:
    G = read_graph(args.graph)
    parts = parse_partition(Path(args.partition).read_text(), G)
    sc = score_partition(G, parts)
    d = deficit(G, parts)
    part = canonical_partition(partition_masks(G, parts))
    return {"schema": SCHEMA, "command": "score", "method": "score", "n": G.n, "m": G.m, **score_fields(sc.q),
            "coverage": score_fields(sc.coverage), "degree_tax": score_fields(sc.tax),
            "deficit": score_fields(d), "partition": partition_labels(G, part), "warnings": []}


def cmd_stats(args) -> dict:
    G = read_graph(args.graph)
    H, removed = strip_isolated(G)
    degs = sorted(G.deg)
    out = {"schema": SCHEMA, "command": "stats", "n": G.n, "m": G.m, "isolated": len(removed),
           "min_degree": degs[0] if degs else 0, "max_degree": G.max_degree,
           "mean_degree": decimal12(Fraction(2 * G.m, G.n)) if G.n else "0"}
    width = heuristic_decompose(H, "min-fill").width if H.n else -1
    out["heuristic_width"] = width
    cover = vcsolver.min_vertex_cover(H)
    out["vertex_cover"] = len(cover)
    try:
        out["connected_subgraphs"] = connsub.count_connected_subgraphs(H, args.cap_subgraphs)
    except BudgetExceeded:
        out["connected_subgraphs"] = f">{args.cap_subgraphs}"
    if G.m:
        out["tw_degree_lower_bound"] = round(tw_degree_lower_bound(G, max(width, 0)), 12)
    return out


def cmd_decompose(args) -> dict:
    G = read_graph(args.graph)
    td = heuristic_decompose(G, args.heuristic, args.seed)
    text = td_to_text(td, G)
    if args.out:
        Path(args.out).write_text(text)
    return {"schema": SCHEMA, "command": "decompose", "width": td.width, "bags": len(td.bags), "td": text}


def cmd_validate_td(args) -> dict:
    G = read_graph(args.graph)
    td = td_from_text(Path(args.td).read_text(), G)
    problems = validate(G, td)
    report = {"schema": SCHEMA, "command": "validate-td", "valid": not problems, "width": td.width,
              "violations": problems}
    if problems:
        raise ValidationFailure(report)
    return report


# ---------------------------------------------------------------------------
# gadget

def cmd_gadget(args) -> dict:
    H = read_graph(args.graph)
    try:
        anchors = tuple(H.index_of(a) for a in args.anchors.split(","))
    except KeyError as exc:
        raise ValidationFailure(str(exc)) from None
    problems = gadget.validate_aecp(H, anchors)
    if problems:
        raise ValidationFailure({"command": "gadget", "violations": problems})
    inst = gadget.AECPInstance(H, anchors)
    need_graph = bool(args.out or args.check_witness)
    try:
        out = gadget.build_gadget(inst, args.unsafe_alpha, materialize=True if need_graph else None)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None
    meta = {"alpha": out.alpha, "beta": out.beta, "m": out.m, "n": out.n, "sqrt_2m": out.root,
            "q0_numerator": out.q0.num, "q0_denominator": out.q0.scale, "q0": str(out.q0),
            "anchors": ",".join(H.labels[a] for a in anchors), "unsafe": str(out.unsafe).lower()}
    report = {"schema": SCHEMA, "command": "gadget", **meta, "warnings": list(out.warnings)}
    if args.out:
        Path(args.out + ".edges").write_text(format_edge_list(out.G))
        Path(args.out + ".meta").write_text(format_metadata(meta))
        report["files"] = [args.out + ".edges", args.out + ".meta"]
    if args.check_witness:
        parts = parse_partition(Path(args.check_witness).read_text(), H)
        try:
            lift = gadget.witness_to_partition(inst, out, parts)
        except gadget.WitnessError as exc:
            raise ValidationFailure(f"witness rejected: {exc}") from None
        report["witness"] = f"witness verified: q = q0 = {lift.q}"
    return report


# ---------------------------------------------------------------------------
# gen

def cmd_gen(args) -> dict:
    rng = random.Random(args.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for k in range(args.count):
        n = rng.randint(args.min_n, args.max_n)
        pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < args.p]
        used = {x for e in pairs for x in e}
        lines = [f"{u} {v}" for u, v in pairs] + [f"v {x}" for x in range(1, n + 1) if x not in used]
        path = outdir / f"g{k:04d}.edges"
        path.write_text("\n".join(lines) + "\n")
        files.append(str(path))
    return {"schema": SCHEMA, "command": "gen", "seed": args.seed, "files": files}


# ---------------------------------------------------------------------------
# output

def render_text(report: dict) -> str:
    cmd = report.get("command")
    lines = []
    if cmd in ("solve", "score"):
        lines.append(f"method: {report['method']}")
        lines.append(f"q = {report['numerator']}/{report['denominator']} = {report['fraction']} "
                     f"~ {report['decimal']}")
        for key in ("coverage", "degree_tax", "deficit"):
            if key in report:
                lines.append(f"{key}: {report[key]['fraction']}")
        for part in report["partition"]:
            lines.append("part: " + " ".join(part))
        for line in report.get("auto", []):
            lines.append(f"auto: {line}")
        for key, val in report.get("counters", {}).items():
            lines.append(f"{key}: {val}")
        if "seconds" in report:
            lines.append(f"seconds: {report['seconds']}")
    elif cmd == "decompose":
        lines.append(report["td"].rstrip("\n"))
    else:
        for key, val in report.items():
            if key in ("schema", "command"):
                continue
            if isinstance(val, list):
                lines.extend(f"{key}: {x}" for x in val)
            else:
                lines.append(f"{key}: {val}")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maxmod", description="Exact modularity maximization.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="maximize modularity")
    s.add_argument("graph")
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--td", help="PACE .td file for the tree-decomposition methods")
    s.add_argument("--epsilon", type=float, help="approximation parameter for tw-approx")
    s.add_argument("--max-parts", type=int, help="restrict to at most this many parts (brute, tw)")
    s.add_argument("--cap-states", type=int, default=twdp.DEFAULT_STATE_BUDGET)
    s.add_argument("--cap-subgraphs", type=int, default=connsub.DEFAULT_SUBGRAPH_CAP)
    s.add_argument("--seed", type=int, help="seed for randomized elimination orders")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("score", parents=[common], help="score a partition")
    s.add_argument("graph")
    s.add_argument("partition")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("gadget", parents=[common], help="build the hardness gadget from an AECP instance")
    s.add_argument("graph")
    s.add_argument("--anchors", required=True, help="comma-separated anchor labels a1,...,ar")
    s.add_argument("--unsafe-alpha", type=int, help="override alpha (may void the hardness guarantee)")
    s.add_argument("--out", help="write PREFIX.edges and PREFIX.meta")
    s.add_argument("--check-witness", help="partition file of V(H) to lift and verify against q0")
    s.set_defaults(func=cmd_gadget)

    s = sub.add_parser("stats", parents=[common], help="graph statistics")
    s.add_argument("graph")
    s.add_argument("--cap-subgraphs", type=int, default=connsub.DEFAULT_SUBGRAPH_CAP)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("decompose", parents=[common], help="heuristic tree decomposition in .td format")
    s.add_argument("graph")
    s.add_argument("--heuristic", choices=("min-fill", "min-degree", "random"), default="min-fill")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("validate-td", parents=[common], help="check a .td file against a graph")
    s.add_argument("graph")
    s.add_argument("td")
    s.set_defaults(func=cmd_validate_td)

    s = sub.add_parser("gen", parents=[common], help="write seeded random G(n, p) edge lists")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--min-n", type=int, default=4)
    s.add_argument("--max-n", type=int, default=8)
    s.add_argument("--p", type=float, default=0.4)
    s.add_argument("--out", default="corpus")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.output
    try:
        report = args.func(args)
    except (OSError, GraphError, TDFormatError, PartitionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationFailure as exc:
        detail = exc.args[0]
        if isinstance(detail, dict):
            emit(detail, fmt)
        else:
            print(f"error: {detail}", file=sys.stderr)
        return EXIT_INVALID
    except EdgelessGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EDGELESS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    emit(report, fmt)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
