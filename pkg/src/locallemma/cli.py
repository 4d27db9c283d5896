"""Command-line front end.

One binary, subcommand style.  Exit codes: 0 pass/success, 1 fail or no
certificate, 2 indeterminate, 64 usage error, 65 input parse error.
Rigor-sensitive numeric output always carries both interval endpoints;
single rounded numbers appear only for quantities that are exact or purely
statistical.  Report paths can additionally render a figure next to the
delimited output via ``--plot``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import criteria, depgraph, digraph_cycles, hypergraph, moser_tardos, ramsey
from .criteria import CriterionVerdict, SymmetricParams, Verdict
from .errors import DomainError, LocalLemmaError, ParseError
from .numeric import safe_float, set_default_precision

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INDETERMINATE = 2
EXIT_USAGE = 64
EXIT_PARSE = 65

PRECISION_ENV = "LOCALLEMMA_PRECISION"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 64, not argparse's 2
        raise UsageError(message)


@dataclass
class OutputSpec:
    format: str = "plain"
    destination: Optional[str] = None
    precision_bits: int = 128
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if not 32 <= self.precision_bits <= 1024:
            raise UsageError("precision must lie in [32, 1024]")

    def write(self, text: str) -> None:
        if self.destination:
            with open(self.destination, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _interval_json(iv) -> dict:
    return {
        "lo": f"{iv.lo.numerator}/{iv.lo.denominator}",
        "hi": f"{iv.hi.numerator}/{iv.hi.denominator}",
        "lo_float": safe_float(iv.lo),
        "hi_float": safe_float(iv.hi),
    }


def _verdict_json(v: CriterionVerdict) -> dict:
    return {
        "verdict": v.holds.value,
        "positivity_only": v.positivity_only,
        "lower_bound": _interval_json(v.lower_bound) if v.lower_bound else None,
        "slack": _interval_json(v.slack),
        "note": v.note,
    }


def _verdict_plain(v: CriterionVerdict) -> str:
    lines = [f"verdict: {v.holds.value}"]
    if v.lower_bound is not None:
        lines.append(
            f"lower bound on P(no bad event): [{safe_float(v.lower_bound.lo):.12g}, "
            f"{safe_float(v.lower_bound.hi):.12g}]"
        )
    elif v.passed() and v.positivity_only:
        lines.append("lower bound: positivity only (no quantitative bound)")
    lines.append(
        f"slack (LHS - RHS, worst event): [{safe_float(v.slack.lo):.12g}, "
        f"{safe_float(v.slack.hi):.12g}]"
    )
    if v.note:
        lines.append(f"note: {v.note}")
    return "\n".join(lines) + "\n"


def _verdict_exit(v: CriterionVerdict) -> int:
    if v.holds is Verdict.PASS:
        return EXIT_PASS
    if v.holds is Verdict.FAIL:
        return EXIT_FAIL
    return EXIT_INDETERMINATE


def _emit_verdict(v: CriterionVerdict, out: OutputSpec) -> int:
    if out.format == "json":
        out.write(json.dumps(_verdict_json(v), indent=2, sort_keys=True) + "\n")
    else:
        out.write(_verdict_plain(v))
    return _verdict_exit(v)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit_table(header, rows, out: OutputSpec, json_key: str) -> None:
    if out.format == "json":
        out.write(
            json.dumps(
                {json_key: [dict(zip(header, row)) for row in rows]},
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
    elif out.format == "csv":
        out.write(_csv_text(header, rows))
    else:
        widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
                  for i, h in enumerate(header)]
        lines = ["  ".join(str(h).rjust(w) for h, w in zip(header, widths))]
        for row in rows:
            lines.append("  ".join(str(c).rjust(w) for c, w in zip(row, widths)))
        out.write("\n".join(lines) + "\n")


def _parse_number_list(text: str) -> list[Fraction]:
    return [Fraction(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _values_from_arg(arg: str) -> list[Fraction]:
    """Comma-separated values, or @path to a whitespace/comma separated file."""
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            return [Fraction(tok) for tok in fh.read().replace(",", " ").split()]
    return _parse_number_list(arg)


# ---------------------------------------------------------------------------
# criteria subcommand
# ---------------------------------------------------------------------------

def _cmd_criteria(args, out: OutputSpec) -> int:
    if args.variant in criteria.SYMMETRIC_VARIANTS:
        if args.p is None or args.d is None:
            raise UsageError("symmetric variants need --p and --d (and --n)")
        params = SymmetricParams(Fraction(args.p), args.d, args.n)
        return _emit_verdict(criteria.symmetric_check(params, args.variant), out)
    if args.graph is None or args.probs is None or args.weights is None:
        raise UsageError(f"variant {args.variant} needs --graph, --probs, --weights")
    loaded = depgraph.load_graph_file(args.graph)
    probs = _values_from_arg(args.probs)
    weights = _values_from_arg(args.weights)
    if args.variant == "abstract":
        if isinstance(loaded, depgraph.DependencyGraph):
            raise UsageError("abstract criterion needs a 'digraph' input file")
        return _emit_verdict(criteria.abstract_lll(probs, loaded, weights), out)
    # cluster criterion works on the undirected structure
    g = loaded if isinstance(loaded, depgraph.DependencyGraph) else depgraph.symmetrize(loaded)
    return _emit_verdict(criteria.cluster_expansion(probs, g, weights), out)


# ---------------------------------------------------------------------------
# ramsey subcommand
# ---------------------------------------------------------------------------

def _parse_k_range(spec: str, step: int) -> list[int]:
    if ".." in spec:
        lo_s, hi_s = spec.split("..", maxsplit=1)
        lo, hi = int(lo_s), int(hi_s)
        return list(range(lo, hi + 1, step))
    return [int(spec)]


def _parse_eps_grid(spec: str) -> list[Fraction]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError("--eps-grid expects start:stop:step")
    start, stop, step = (Fraction(p) for p in parts)
    if step <= 0 or start <= 0 or stop >= 1:
        raise UsageError("--eps-grid needs 0 < start, stop < 1, step > 0")
    grid = []
    x = start
    while x <= stop:
        grid.append(x)
        x += step
    return grid


def _ramsey_row(payload: tuple[int, str]) -> tuple[int, int, int]:
    k, variant = payload
    if variant == "both":
        return (
            k,
            ramsey.reported_lower_bound(ramsey.RamseyQuery(k, "ver3")),
            ramsey.reported_lower_bound(ramsey.RamseyQuery(k, "ver4")),
        )
    value = ramsey.reported_lower_bound(ramsey.RamseyQuery(k, variant))
    return (k, value, value)


def _curve_row(eps: Fraction) -> ramsey.CurveRow:
    return ramsey.asymptotic_threshold_curve([eps])[0]


def _cmd_ramsey(args, out: OutputSpec) -> int:
    if args.figure1:
        if not args.eps_grid:
            raise UsageError("--figure1 needs --eps-grid start:stop:step")
        grid = _parse_eps_grid(args.eps_grid)
        if out.jobs > 1:
            with ProcessPoolExecutor(max_workers=out.jobs) as pool:
                rows = list(pool.map(_curve_row, grid))
        else:
            rows = ramsey.asymptotic_threshold_curve(grid)
        table = [
            (r.epsilon, r.k_exact, f"{r.k_approx:.6f}")
            + (("scan-fallback",) if r.used_scan_fallback else ())
            for r in rows
        ]
        _emit_table(("epsilon", "k0_exact", "k0_approx"), table, out, "curve")
        if args.plot:
            from .plotting import save_threshold_curve

            save_threshold_curve(rows, args.plot)
        return EXIT_PASS
    ks = _parse_k_range(args.k, args.step)
    payloads = [(k, args.variant) for k in ks]
    if out.jobs > 1:
        with ProcessPoolExecutor(max_workers=out.jobs) as pool:
            rows = list(pool.map(_ramsey_row, payloads))
    else:
        rows = [_ramsey_row(p) for p in payloads]
    if args.variant == "both":
        _emit_table(("k", "ver3", "ver4"), rows, out, "table")
    else:
        _emit_table(("k", args.variant), [(k, a) for k, a, _b in rows], out, "table")
    sys.stderr.write(f"# convention: {ramsey.TABLE_CONVENTION}\n")
    if args.plot and args.variant == "both":
        from .plotting import save_ramsey_bounds

        save_ramsey_bounds(rows, args.plot)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# hypergraph subcommand
# ---------------------------------------------------------------------------

def _parse_pairs(spec: str) -> list[tuple[int, int]]:
    pairs = []
    for tok in spec.split(","):
        r_s, k_s = tok.split(":")
        pairs.append((int(r_s), int(k_s)))
    return pairs


def _cmd_hypergraph(args, out: OutputSpec) -> int:
    if args.action == "table2":
        pairs = list(hypergraph.RAINBOW_GAP_EXAMPLES)
        if args.pairs:
            pairs += _parse_pairs(args.pairs)
        rows = hypergraph.table2_rows(pairs)
        _emit_table(("r", "k", "A", "B"), rows, out, "table")
        if args.plot:
            from .plotting import save_rainbow_caps

            save_rainbow_caps(rows, args.plot)
        return EXIT_PASS

    h = hypergraph.load_hypergraph_file(args.file)
    if args.action == "check":
        if args.rainbow:
            verdict = hypergraph.rainbow_criterion(h, args.k, sharpened=args.sharpened)
        else:
            r_min = min(len(e) for e in h.edges)
            d = hypergraph.max_edge_intersections(h)
            verdict = hypergraph.k_colorability_criterion(r_min, d, args.k)
            sys.stderr.write(f"# observed: min edge size {r_min}, max intersections {d}\n")
        return _emit_verdict(verdict, out)

    # solve
    result = hypergraph.solve_coloring(
        h, args.k, mode=args.mode, seed=out.seed, max_steps=args.max_steps
    )
    if result.colors is not None:
        payload = {
            "colors": list(result.colors),
            "mode": args.mode,
            "k": args.k,
            "resamples": result.stats.total,
            "seed": out.seed,
        }
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return EXIT_PASS
    r_min = min(len(e) for e in h.edges)
    d = hypergraph.max_edge_intersections(h)
    verdict = hypergraph.k_colorability_criterion(r_min, d, args.k)
    payload = {
        "colors": None,
        "terminated": False,
        "max_steps": args.max_steps,
        "resamples": result.stats.total,
        "criterion": _verdict_json(verdict),
        "explanation": (
            f"no coloring within {args.max_steps} steps; sufficient condition "
            f"e*d <= k^(r-1) with d={d}, r={r_min} is {verdict.holds.value}"
        ),
    }
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_FAIL


# ---------------------------------------------------------------------------
# mt subcommand
# ---------------------------------------------------------------------------

def _tree_json(tree) -> dict:
    return tree.to_json_obj()


def _cmd_mt(args, out: OutputSpec) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        space, events = moser_tardos.load_instance_json(fh.read())
    if args.seed_override is not None:
        space = moser_tardos.VariableSpace(space.variables, args.seed_override)

    if args.gw is not None:
        graph = moser_tardos.build_dependency_graph(events)
        if args.x is None:
            raise UsageError("--gw needs --x weights")
        weights = _values_from_arg(args.x)
        counts: dict = {}
        reprs: dict = {}
        exceeded = 0
        for trial in range(args.trials):
            try:
                tree = moser_tardos.galton_watson_sample(
                    args.gw, weights, graph, seed=space.seed + trial,
                    depth_cap=args.depth_cap,
                )
            except LocalLemmaError:
                exceeded += 1
                continue
            key = tree.canonical()
            counts[key] = counts.get(key, 0) + 1
            reprs.setdefault(key, tree)
        top = sorted(counts.items(), key=lambda kv: -kv[1])[:20]
        trees_payload = []
        for key, count in top:
            tree = reprs[key]
            p_tau = moser_tardos.tree_probability(tree, weights, graph)
            trees_payload.append(
                {
                    "tree": _tree_json(tree),
                    "count": count,
                    "frequency": count / args.trials,
                    "probability": _interval_json(p_tau),
                }
            )
        out.write(
            json.dumps(
                {
                    "root": args.gw,
                    "trials": args.trials,
                    "depth_exceeded": exceeded,
                    "trees": trees_payload,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n"
        )
        return EXIT_PASS

    log, stats = moser_tardos.run(
        space, events, selection=args.selection, max_steps=args.max_steps
    )
    payload = {
        "log": json.loads(log.to_json()),
        "stats": {
            "per_event": {str(k): v for k, v in sorted(stats.per_event.items())},
            "total": stats.total,
            "wall_steps": stats.wall_steps,
        },
    }
    if args.witness_tree is not None:
        tree = moser_tardos.witness_tree(log, events, args.witness_tree)
        payload["witness_tree"] = _tree_json(tree)
        payload["witness_tree_proper"] = moser_tardos.is_proper_witness_tree(tree, events)
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_PASS if log.terminated else EXIT_FAIL


# ---------------------------------------------------------------------------
# digraph subcommand
# ---------------------------------------------------------------------------

def _cmd_digraph(args, out: OutputSpec) -> int:
    d = digraph_cycles.load_digraph_file(args.file)
    if args.action == "check":
        delta, Delta = (
            (args.delta, args.Delta)
            if args.delta is not None and args.Delta is not None
            else digraph_cycles.degree_profile(d)
        )
        strict = digraph_cycles.alon_linial_condition(delta, Delta, args.k, relaxed=False)
        relaxed = digraph_cycles.alon_linial_condition(delta, Delta, args.k, relaxed=True)
        if out.format == "json":
            out.write(
                json.dumps(
                    {
                        "delta": delta,
                        "Delta": Delta,
                        "k": args.k,
                        "strict": _verdict_json(strict),
                        "relaxed": _verdict_json(relaxed),
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )
        else:
            out.write(f"delta={delta} Delta={Delta} k={args.k}\n")
            out.write("strict:\n" + _verdict_plain(strict))
            out.write("relaxed:\n" + _verdict_plain(relaxed))
        return _verdict_exit(relaxed)

    if args.action == "solve":
        work = d
        if args.reduce_to is not None:
            work = digraph_cycles.reduce_out_degree(d, args.reduce_to)
        result = digraph_cycles.find_mod_k_coloring(
            work, args.k, seed=out.seed, max_steps=args.max_steps
        )
        if result.coloring is None:
            out.write(
                json.dumps(
                    {"colors": None, "terminated": False, "max_steps": args.max_steps,
                     "resamples": result.stats.total},
                    indent=2, sort_keys=True,
                )
                + "\n"
            )
            return EXIT_FAIL
        out.write(
            json.dumps(
                {"k": args.k, "colors": list(result.coloring.colors),
                 "resamples": result.stats.total, "seed": out.seed},
                indent=2, sort_keys=True,
            )
            + "\n"
        )
        return EXIT_PASS

    # cycle: either verify and extract from a given coloring, or solve first
    if args.coloring:
        with open(args.coloring, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        coloring = digraph_cycles.ModKColoring(int(data["k"]), tuple(data["colors"]))
        if not digraph_cycles.is_valid_mod_k_coloring(d, coloring):
            sys.stderr.write("error: coloring is not valid for this digraph\n")
            return EXIT_FAIL
    else:
        work = d
        if args.reduce_to is not None:
            work = digraph_cycles.reduce_out_degree(d, args.reduce_to)
        result = digraph_cycles.find_mod_k_coloring(
            work, args.k, seed=out.seed, max_steps=args.max_steps
        )
        if result.coloring is None:
            sys.stderr.write(f"error: no coloring within {args.max_steps} steps\n")
            return EXIT_FAIL
        coloring = result.coloring
        d = work
    cert = digraph_cycles.extract_mod_k_cycle(d, coloring)
    out.write(digraph_cycles.certificate_to_json(d, cert) + "\n")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "plain"),
                        default=argparse.SUPPRESS)
    common.add_argument("--output", default=argparse.SUPPRESS,
                        help="write results to this path")
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                        help=f"working precision bits (or ${PRECISION_ENV})")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="parallel workers for grid rows")

    parser = _Parser(prog="locallemma", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_command("criteria", help="sufficient-condition checks")
    p.add_argument("--variant", required=True,
                   choices=("abstract", "cluster") + criteria.SYMMETRIC_VARIANTS)
    p.add_argument("--p", default=None, help="uniform probability bound")
    p.add_argument("--d", type=int, default=None, help="dependency degree bound")
    p.add_argument("--n", type=int, default=1, help="event count")
    p.add_argument("--graph", default=None, help="graph/digraph file")
    p.add_argument("--probs", default=None, help="per-event probabilities (csv or @file)")
    p.add_argument("--weights", default=None, help="per-event weights (csv or @file)")

    p = add_command("ramsey", help="diagonal Ramsey lower bounds")
    p.add_argument("--k", default="10..40", help="single k or range lo..hi")
    p.add_argument("--step", type=int, default=5)
    p.add_argument("--variant", choices=("ver3", "ver4", "both"), default="both")
    p.add_argument("--figure1", action="store_true",
                   help="emit the asymptotic-threshold curve instead of the table")
    p.add_argument("--eps-grid", default=None, help="start:stop:step")
    p.add_argument("--plot", default=None, help="also render a figure to this file")

    p = add_command("hypergraph", help="hypergraph coloring pipelines")
    p.add_argument("action", choices=("table2", "check", "solve"))
    p.add_argument("--file", default=None, help="hypergraph file")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--pairs", default=None, help="extra r:k pairs for table2")
    p.add_argument("--rainbow", action="store_true")
    p.add_argument("--sharpened", action="store_true")
    p.add_argument("--mode", choices=hypergraph.COLORING_MODES, default="proper")
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--plot", default=None)

    p = add_command("mt", help="resampling solver on an instance file")
    p.add_argument("--file", required=True, help="instance JSON")
    p.add_argument("--selection", choices=moser_tardos.SELECTION_RULES,
                   default="lowest_index")
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--seed-override", type=int, default=None,
                   help="override the instance seed")
    p.add_argument("--witness-tree", type=int, default=None, metavar="T",
                   help="also emit the witness tree of step T")
    p.add_argument("--gw", type=int, default=None, metavar="ROOT",
                   help="branching-process experiment rooted at this event")
    p.add_argument("--x", default=None, help="branching weights (csv or @file)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--depth-cap", type=int, default=64)

    p = add_command("digraph", help="mod-k directed-cycle pipeline")
    p.add_argument("action", choices=("check", "solve", "cycle"))
    p.add_argument("--file", required=True, help="digraph file")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--Delta", type=int, default=None)
    p.add_argument("--reduce-to", type=int, default=None,
                   help="reduce all out-degrees to exactly this before solving")
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--coloring", default=None,
                   help="JSON file with {k, colors} to verify and extract from")
    return parser


_COMMANDS = {
    "criteria": _cmd_criteria,
    "ramsey": _cmd_ramsey,
    "hypergraph": _cmd_hypergraph,
    "mt": _cmd_mt,
    "digraph": _cmd_digraph,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        precision = getattr(args, "precision", None)
        if precision is None:
            precision = int(os.environ.get(PRECISION_ENV, "128"))
        out = OutputSpec(
            format=getattr(args, "format", "plain"),
            destination=getattr(args, "output", None),
            precision_bits=precision,
            seed=getattr(args, "seed", 0),
            jobs=getattr(args, "jobs", 1),
        )
        set_default_precision(out.precision_bits)
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except FileNotFoundError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (DomainError, LocalLemmaError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
