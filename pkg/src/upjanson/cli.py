"""Command line entry point: ``upjanson compute|verify|generate``.

Exit codes: 0 success, 1 usage or parse error, 2 verification failure or
unsound dependency relation, 3 instance past the exact cap without Monte
Carlo.
"""
from __future__ import annotations

import argparse
import itertools
import sys
from collections.abc import Sequence

from .bounds import DEFAULT_T_FRACTIONS, BoundReport, build_report
from .dependency import UnsoundRelation, ValidationReport
from .instance import GRAPHS, KINDS, InstanceError, dumps, generate, parse_instance, serialize_instance
from .model import EventFamily
from .oracle import INEQUALITY_TOL, Verification, check_axioms, verify
from .prob import DEFAULT_MAX_EXACT_SUPPORT, TooLargeForExact

__all__ = ["main", "run_compute", "run_verify", "EXIT_OK", "EXIT_USAGE", "EXIT_FAIL", "EXIT_TOO_LARGE"]

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_TOO_LARGE = 0, 1, 2, 3
_AXIOM_SAMPLE = 200


def _clamp(v: float) -> float:
    return min(1.0, max(0.0, v))


def _validation_doc(v: ValidationReport | None):
    if v is None:
        return None
    return {
        "passed": v.passed,
        "method": v.method,
        "tolerance": v.tolerance,
        "worst_violation": v.worst_violation,
        "worst_event": v.worst_event,
        "worst_subset": list(v.worst_subset),
        "failures": [
            {"event": e.event, "violation": e.worst_violation, "allowed": e.allowed,
             "subset": list(e.worst_subset)}
            for e in v.failures
        ],
    }


def _report_doc(command: str, family: EventFamily, rep: BoundReport, flags) -> dict:
    s = rep.summary
    rel = rep.relation
    return {
        "command": command,
        "instance": {
            "n": family.space.n,
            "k": family.k,
            "support": family.support.bit_count(),
            "weighted": family.weighted,
        },
        "dependency": {
            "mode": rel.mode,
            "pairs": [list(p) for p in rel.sorted_pairs()],
            "warnings": list(rel.warnings),
            "validation": _validation_doc(rep.validation),
        },
        "summary": {
            "mu": s.mu,
            "delta": s.delta,
            "eps": s.eps,
            "delta_bar": s.delta_bar,
            "method": s.method,
        },
        "events": [{"index": i, "prob": pr, "weight": c} for i, (pr, c) in enumerate(s.per_event)],
        "bounds": {
            "pr_zero": {b: {"raw": v, "clamped": _clamp(v)} for b, v in rep.pr0.items()},
            "lower_tail": {
                b: [
                    {"fraction": f, "t": t, "raw": v, "clamped": _clamp(v)}
                    for f, t, v in zip(rep.t_fractions, rep.t_grid, vals)
                ]
                for b, vals in rep.tail.items()
            },
        },
        "methods": dict(rep.methods),
        "notes": list(rep.notes),
        "meta": {
            "seed": flags.seed,
            "mc_samples": flags.mc_samples,
            "max_exact_support": flags.max_exact_support,
            "tolerance": flags.tolerance,
        },
    }


def run_compute(family: EventFamily, flags) -> dict:
    """Summary and bounds; raises ``UnsoundRelation`` unless ``flags.force``."""
    rep = build_report(
        family,
        t_fractions=flags.t_grid,
        max_support=flags.max_exact_support,
        mc_samples=flags.mc_samples,
        seed=flags.seed,
        force=flags.force,
    )
    return _report_doc("compute", family, rep, flags)


def _axiom_items(family: EventFamily, cap: int):
    ev = family.events
    pairs = [
        (ev[i], ev[j])
        for i, j in itertools.combinations(range(family.k), 2)
        if (ev[i].support | ev[j].support).bit_count() <= cap
    ]
    triples = [
        (ev[i], ev[j], ev[l])
        for i, j, l in itertools.permutations(range(family.k), 3)
        if j < l and (ev[i].support | ev[j].support | ev[l].support).bit_count() <= cap
    ]
    return pairs[:_AXIOM_SAMPLE] + triples[:_AXIOM_SAMPLE]


def _verification_doc(family: EventFamily, ver: Verification, flags) -> tuple[dict, bool]:
    doc = _report_doc("verify", family, ver.report, flags)
    doc["dependency"]["validation"] = _validation_doc(ver.validation)
    dist = ver.distribution
    doc["oracle"] = {
        "method": "statistical" if ver.statistical else "exact",
        "coords": dist.coords,
        "samples": dist.samples,
        "pr_zero": ver.pr_zero,
        "distribution": [[v, q] for v, q in dist.atoms.items()],
        "lower_tail": [
            {"fraction": f, "t": t, "threshold": ver.report.summary.mu - t, "prob": q}
            for f, t, q in zip(ver.report.t_fractions, ver.report.t_grid, ver.lower_tails)
        ],
    }
    axioms = None
    if not ver.statistical:
        axioms = check_axioms(family.space, _axiom_items(family, flags.max_exact_support))
    doc["checks"] = {
        "domination": [
            {"bound": d.bound, "t": d.t, "bound_value": d.bound_value, "exact": d.exact_value,
             "slack": d.slack, "passed": d.passed}
            for d in ver.domination
        ],
        "aim": [
            {"ordering": list(a.ordering), "worst_slack": a.worst_slack,
             "skipped": sum(e.skipped for e in a.entries), "passed": a.passed}
            for a in ver.aim
        ],
        "aim2": None if ver.aim2 is None else {
            "checks": len(ver.aim2.entries),
            "worst_slack": ver.aim2.worst_slack,
            "passed": ver.aim2.passed,
        },
        "axioms": None if axioms is None else {
            "harris": axioms.harris_checks,
            "closure": axioms.closure_checks,
            "identity": axioms.identity_checks,
            "worst_harris_slack": axioms.worst_harris_slack,
            "worst_identity_error": axioms.worst_identity_error,
            "failures": list(axioms.failures),
            "passed": axioms.passed,
        },
        "validation": ver.validation.passed,
    }
    passed = ver.passed and (axioms is None or axioms.passed)
    doc["passed"] = passed
    return doc, passed


def run_verify(family: EventFamily, flags) -> tuple[dict, bool]:
    """Full oracle comparison; returns the report and whether every check passed."""
    ver = verify(
        family,
        t_fractions=flags.t_grid,
        tol=flags.tolerance,
        max_support=flags.max_exact_support,
        mc_samples=flags.mc_samples,
        seed=flags.seed,
    )
    return _verification_doc(family, ver, flags)


# ---------------------------------------------------------------------------
# text rendering


def _f(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "NO"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def render_table(doc: dict) -> str:
    lines = []
    inst, s = doc["instance"], doc["summary"]
    lines.append(f"instance: n={inst['n']} k={inst['k']} support={inst['support']} "
                 f"weighted={'yes' if inst['weighted'] else 'no'}")
    dep = doc["dependency"]
    lines.append(f"dependency: {dep['mode']}, {len(dep['pairs'])} related pairs")
    for w in dep["warnings"]:
        lines.append(f"  warning: {w}")
    if dep["validation"] is not None:
        v = dep["validation"]
        lines.append(f"  validation: passed={_f(v['passed'])} worst={v['worst_violation']:.3g}")
    lines.append(f"mu={_f(s['mu'])} delta={_f(s['delta'])} eps={_f(s['eps'])} "
                 f"delta_bar={_f(s['delta_bar'])} [{s['method']}]")
    oracle = doc.get("oracle")
    lines.append("")
    lines.append(f"{'Pr(X=0)':<16}{'raw':>12}{'clamped':>12}")
    for b, v in doc["bounds"]["pr_zero"].items():
        lines.append(f"{b:<16}{_f(v['raw']):>12}{_f(v['clamped']):>12}")
    if oracle is not None:
        lines.append(f"{'oracle':<16}{_f(oracle['pr_zero']):>12}")
    tail = doc["bounds"]["lower_tail"]
    if tail:
        fr = next(iter(tail.values()))
        lines.append("")
        header = f"{'Pr(X<=mu-t)':<16}" + "".join(f"{'t=' + format(r['t'], '.4g'):>12}" for r in fr)
        lines.append(header)
        for b, rows in tail.items():
            lines.append(f"{b:<16}" + "".join(f"{_f(r['raw']):>12}" for r in rows))
        if oracle is not None:
            lines.append(f"{'oracle':<16}" + "".join(f"{_f(r['prob']):>12}" for r in oracle["lower_tail"]))
    for note in doc["notes"]:
        lines.append(f"note: {note}")
    if "checks" in doc:
        c = doc["checks"]
        bad = [d for d in c["domination"] if not d["passed"]]
        lines.append("")
        lines.append(f"domination: {len(c['domination']) - len(bad)}/{len(c['domination'])} passed")
        for d in bad:
            lines.append(f"  VIOLATION {d['bound']} t={_f(d['t'])}: bound {_f(d['bound_value'])} "
                         f"< exact {_f(d['exact'])}")
        if c["aim"]:
            lines.append(f"aim: {sum(a['passed'] for a in c['aim'])}/{len(c['aim'])} orderings passed")
        if c["aim2"] is not None:
            lines.append(f"aim2: passed={_f(c['aim2']['passed'])} worst slack={c['aim2']['worst_slack']:.3g}")
        if c["axioms"] is not None:
            lines.append(f"axioms: passed={_f(c['axioms']['passed'])}")
        lines.append(f"validation: passed={_f(c['validation'])}")
        lines.append(f"result: {'PASS' if doc['passed'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fractions(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}") from None
    if not out or any(not 0.0 <= f <= 1.0 for f in out):
        raise argparse.ArgumentTypeError("t-grid fractions must lie in [0, 1]")
    return out


def _pair(kind):
    def parse(text: str):
        parts = text.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
        return tuple(kind(v) for v in parts)
    return parse


def _p_arg(text: str):
    parts = [float(v) for v in text.split(",")]
    return parts[0] if len(parts) == 1 else parts


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="upjanson", description="Lower-tail bounds for counts of monotone events.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("compute", "summary and bounds"), ("verify", "bounds vs. the exact oracle")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("instance", nargs="?", default="-", help="instance file, '-' for stdin")
        p.add_argument("--t-grid", type=_fractions, default=DEFAULT_T_FRACTIONS,
                       help="comma list of fractions of mu (default 0.25,0.5,0.75,1)")
        p.add_argument("--mc-samples", type=_positive, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-exact-support", type=_positive, default=DEFAULT_MAX_EXACT_SUPPORT)
        p.add_argument("--tolerance", type=float, default=INEQUALITY_TOL)
        p.add_argument("--dependency", choices=("support", "exact"), default=None,
                       help="override the relation declared in the file")
        p.add_argument("--format", choices=("table", "machine"), default="table")
        p.add_argument("--force", action="store_true",
                       help="compute bounds even if a declared relation fails validation")

    g = sub.add_parser("generate", help="write a generated instance")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, required=True,
                   help="vertices of K_n (subgraph-count) or coordinates (other kinds)")
    g.add_argument("--p", type=_p_arg, default=None, help="probability, or LO,HI for random per coordinate")
    g.add_argument("--graph", default="triangle", help=f"one of {', '.join(GRAPHS)} or edges like 0-1,1-2")
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--r", type=int, default=3)
    g.add_argument("--threshold", type=int, default=None)
    g.add_argument("--minsets", type=_pair(int), default=(1, 3))
    g.add_argument("--size", type=_pair(int), default=(1, 3))
    g.add_argument("--weights", type=_pair(float), default=None)
    g.add_argument("-o", "--output", default="-")
    return parser


def _graph_arg(text: str):
    if text in GRAPHS:
        return text
    try:
        return [tuple(int(v) for v in e.split("-")) for e in text.split(",")]
    except ValueError:
        raise ValueError(f"unknown graph {text!r}") from None


def _generate_params(args) -> dict:
    if args.kind == "subgraph-count":
        params = {"graph": _graph_arg(args.graph), "n": args.n}
        if args.p is not None:
            params["p"] = args.p
    elif args.kind == "threshold":
        params = {"n": args.n, "r": args.r, "threshold": args.threshold}
        if args.k is None:
            params["coords"] = [list(range(args.r))]
        else:
            params["k"] = args.k
        if args.p is not None:
            params["p"] = args.p
    else:
        params = {"n": args.n, "k": args.k or 4, "minsets": args.minsets, "size": args.size,
                  "weights": args.weights}
        if args.p is not None:
            params["p"] = args.p
    return params


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "generate":
        try:
            family = generate(args.kind, _generate_params(args), args.seed)
        except ValueError as exc:
            print(f"upjanson: {exc}", file=sys.stderr)
            return EXIT_USAGE
        _write(args.output, serialize_instance(family))
        return EXIT_OK

    try:
        family = parse_instance(_read(args.instance), dependency=args.dependency,
                                max_support=args.max_exact_support)
    except (InstanceError, OSError) as exc:
        print(f"upjanson: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "compute":
            doc, passed = run_compute(family, args), True
        else:
            doc, passed = run_verify(family, args)
    except TooLargeForExact as exc:
        print(f"upjanson: {exc}; rerun with --mc-samples N for a statistical result", file=sys.stderr)
        return EXIT_TOO_LARGE
    except UnsoundRelation as exc:
        print(f"upjanson: {exc}; pass --force to compute anyway", file=sys.stderr)
        return EXIT_FAIL

    out = dumps(doc) + "\n" if args.format == "machine" else render_table(doc)
    sys.stdout.write(out)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
