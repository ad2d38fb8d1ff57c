"""Command-line entry point: ``casl <subcommand> [files] [options]``.

Exit codes: 0 when the analysis ran (and passed, where a check applies),
1 when it ran and a check failed, 2 for any input problem.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import Sequence

from . import render
from .abstraction import (
    ALL_COMPLETE_CLUSTERS,
    ALL_JOINT_CLUSTERS,
    Aggregator,
    AlignmentError,
    ambiguity_report,
    approx_consistency_tv,
    check_exact_consistency,
    quotient_high_model,
)
from .audit import RaceRule, audit_validity_check
from .dsl import Document, DocumentError, Workspace, alignment_decl, load_files, model_decl, serialize
from .dsl.lower import lower
from .dsl.syntax import parse_syntax
from .norms import norm_effect
from .scm import (
    EnumerationCapExceeded,
    Intervention,
    ModelError,
    enumeration_cap,
    interventional_distribution,
    sample_distribution,
    to_fraction,
)

COMMANDS = ("validate", "intervene", "consistency", "ambiguity", "audit", "norms", "quotient")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("paths", nargs="*", metavar="FILE", help=".casl inputs")
    common.add_argument("--file", action="append", default=[], metavar="PATH", help="input file (repeatable)")
    common.add_argument("--format", choices=render.FORMATS, default="table")
    common.add_argument("--cap", type=int, help="maximum number of exogenous states to enumerate")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for Monte Carlo estimates")

    ap = _Parser(prog="casl", description="Causal abstraction audits over finite structural causal models.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="parse and check documents")

    p = sub.add_parser("intervene", parents=[common], help="interventional distribution of a model")
    p.add_argument("--model")
    p.add_argument("--do", default="", help='e.g. "Fine=scarlet,Pecking=no"')
    p.add_argument("--query", help="comma-separated variables to keep")
    p.add_argument("--samples", type=int, help="estimate by Monte Carlo with this many draws")

    p = sub.add_parser("consistency", parents=[common], help="check an alignment for causal consistency")
    p.add_argument("--alignment")
    p.add_argument("--mode", choices=("exact", "tv"), default=None)
    p.add_argument("--epsilon", help="total-variation threshold p/q (tv mode)")
    p.add_argument("--joint", action="store_true", help="check every joint setting of every cluster subset")

    p = sub.add_parser("ambiguity", parents=[common], help="outcome spread over the preimages of a high intervention")
    p.add_argument("--alignment")
    p.add_argument("--do", required=True)
    p.add_argument("--outcome", required=True, help="VAR=value")
    p.add_argument("--aggregator", default="mean")

    p = sub.add_parser("audit", parents=[common], help="run a declared audit")
    p.add_argument("--audit")
    p.add_argument("--aggregator")
    p.add_argument("--rule", choices=[r.value for r in RaceRule])
    p.add_argument("--no-diagnostics", action="store_true", help="skip positivity and atypicality")

    p = sub.add_parser("norms", parents=[common], help="attribute versus norm effect")
    p.add_argument("--compare")
    p.add_argument("--aggregator")

    p = sub.add_parser("quotient", parents=[common], help="construct the quotient high model of an alignment")
    p.add_argument("--alignment")
    p.add_argument("--aggregator")
    return ap


def _pick(table: dict, name: str | None, kind: str):
    if name is None:
        if len(table) == 1:
            return next(iter(table.items()))
        raise UsageError(f"choose a {kind} with --{kind}: {', '.join(sorted(table)) or 'none declared'}")
    if name not in table:
        raise UsageError(f"no {kind} named {name!r}; declared: {', '.join(sorted(table)) or 'none'}")
    return name, table[name]


def _aggregator(name: str | None, default: Aggregator) -> Aggregator:
    if name is None:
        return default
    try:
        return Aggregator.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _assignment(text: str, flag: str) -> tuple[str, str]:
    var, eq, val = text.partition("=")
    if not eq or not var.strip() or not val.strip():
        raise UsageError(f"{flag} expects VAR=value, got {text!r}")
    return var.strip(), val.strip()


def _intervention(text: str) -> Intervention:
    try:
        return Intervention.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad intervention {text!r}: {exc}") from None


# ---------------------------------------------------------------- commands


def _validate(args, paths: list[str]) -> tuple[int, render.Rendered]:
    files = []
    ws = Workspace()
    for p in paths:  # later files see what earlier ones declared, as in every other command
        doc, diags = parse_syntax(Path(p).read_text(encoding="utf-8"))
        if not diags:
            built, diags = lower(doc, ws)
            if not diags:
                ws = built
        files.append((p, len(doc.declarations), diags))
    rendered = render.diagnostics(files)
    return (0 if rendered.payload["valid"] else 2), rendered


def _intervene(args, ws: Workspace):
    name, scm = _pick(ws.models, args.model, "model")
    iv = _intervention(args.do)
    scope = scm.endogenous_names
    if args.query:
        scope = tuple(v.strip() for v in args.query.split(",") if v.strip())
        unknown = [v for v in scope if not scm.is_endogenous(v)]
        if unknown:
            raise UsageError(f"unknown query variables {unknown}")
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        d = sample_distribution(scm, iv, n=args.samples, seed=args.seed)
        return 0, render.sampled(d, name, iv, scope)
    d = interventional_distribution(scm, iv).marginal(scope)
    return 0, render.distribution(d, name, iv)


def _consistency(args, ws: Workspace):
    name, a = _pick(ws.alignments, args.alignment, "alignment")
    mode = args.mode or ("tv" if args.epsilon is not None else "exact")
    family = ALL_JOINT_CLUSTERS if args.joint else ALL_COMPLETE_CLUSTERS
    if mode == "exact":
        if args.epsilon is not None:
            raise UsageError("--epsilon applies to --mode tv only")
        report = check_exact_consistency(a, family)
    else:
        if args.epsilon is None:
            raise UsageError("--mode tv needs an explicit --epsilon")
        try:
            eps = to_fraction(args.epsilon)
        except (TypeError, ValueError, ZeroDivisionError):
            raise UsageError(f"bad --epsilon {args.epsilon!r}") from None
        report = approx_consistency_tv(a, family, eps)
    return (0 if report.passed else 1), render.consistency(report, name)


def _ambiguity(args, ws: Workspace):
    name, a = _pick(ws.alignments, args.alignment, "alignment")
    iv = _intervention(args.do)
    outcome, value = _assignment(args.outcome, "--outcome")
    report = ambiguity_report(a, iv, outcome, value, _aggregator(args.aggregator, Aggregator()))
    return 0, render.ambiguity(report, name)


def _audit(args, ws: Workspace):
    name, spec = _pick(ws.audits, args.audit, "audit")
    report = audit_validity_check(
        spec.population,
        spec.projection,
        spec.construction,
        spec.resume1,
        spec.resume2,
        rule=RaceRule(args.rule) if args.rule else spec.rule,
        agg=_aggregator(args.aggregator, spec.aggregator),
        race=spec.race,
        anchor=spec.anchor,
        diagnostics=not args.no_diagnostics,
    )
    failed = report.verdict is False or (report.positivity is not None and not report.positivity.passed)
    return (1 if failed else 0), render.audit(report, name)


def _norms(args, ws: Workspace):
    name, spec = _pick(ws.normcompares, args.compare, "compare")
    agg = _aggregator(args.aggregator, spec.aggregator)
    report = norm_effect(spec.model, spec.pair, spec.contrast, spec.outcome, spec.value, agg)
    return 0, render.norms(report, name)


def _quotient(args, ws: Workspace):
    name, a = _pick(ws.alignments, args.alignment, "alignment")
    declared = ws.quotients.get(name)
    default = Aggregator.parse(declared.aggregator) if declared else Aggregator()
    agg = _aggregator(args.aggregator, default)
    high = f"{name}_high"
    result = quotient_high_model(a.low, a.spec(), agg, name=high)
    low = next((k for k, m in ws.models.items() if m == a.low), a.low.name)
    text = serialize(Document((model_decl(result.model, high), alignment_decl(result.alignment, low, high, name=name))))
    return (0 if result.exact else 1), render.quotient(result, name, text)


HANDLERS = {
    "intervene": _intervene,
    "consistency": _consistency,
    "ambiguity": _ambiguity,
    "audit": _audit,
    "norms": _norms,
    "quotient": _quotient,
}


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """Execute one command; returns (exit code, stdout text, stderr text)."""
    try:
        args = build_parser().parse_args(list(argv))
        paths = list(args.paths) + list(args.file)
        if not paths:
            raise UsageError("no input files; pass paths or --file")
        missing = [p for p in paths if not Path(p).is_file()]
        if missing:
            raise UsageError(f"cannot read {', '.join(missing)}")
        if args.cap is not None and args.cap < 1:
            raise UsageError("--cap must be positive")
        with enumeration_cap(args.cap) if args.cap is not None else nullcontext():
            if args.command == "validate":
                code, rendered = _validate(args, paths)
            else:
                code, rendered = HANDLERS[args.command](args, load_files(paths))
        return code, rendered.format(args.format), ""
    except UsageError as exc:
        return 2, "", f"error: {exc}\n"
    except SystemExit as exc:  # --help
        return int(exc.code or 0), "", ""
    except DocumentError as exc:
        return 2, "", str(exc) + "\n"
    except EnumerationCapExceeded as exc:
        return 2, "", f"error: {exc}\n"
    except (ModelError, AlignmentError, ValueError) as exc:
        return 2, "", f"error: {type(exc).__name__}: {exc}\n"
    except OSError as exc:
        return 2, "", f"error: {exc}\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
