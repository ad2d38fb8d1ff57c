"""Semantic checks and lowering of documents onto the model builders.

Builder failures carry a ``subject`` (a variable or declaration name); it is
used here to attach each failure to the source span that introduced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from ..abstraction import (
    Aggregator,
    Alignment,
    AlignmentBuildError,
    AlignmentError,
    ClusterSpec,
    QuotientResult,
    build_alignment,
    quotient_high_model,
)
from ..audit import (
    OutcomeInConstitutiveBasis,
    PopulationModel,
    RaceRule,
    ResumeProjection,
    check_outcome_excluded,
)
from ..norms import AlignmentPair, HighContrast
from ..scm import SCM, CycleDetected, ModelBuildError, ModelError, build_scm
from .syntax import (
    AlignmentDecl,
    AuditDecl,
    ClusterStmt,
    CopyFn,
    Diagnostic,
    Document,
    DropStmt,
    ExogenousStmt,
    IdentityStmt,
    ModelDecl,
    NormCompareDecl,
    PopulationDecl,
    ProjectionDecl,
    SourceSpan,
    TableRow,
    VarStmt,
)


@dataclass(frozen=True)
class AuditSpec:
    name: str
    population: PopulationModel
    projection: ResumeProjection
    construction: Alignment
    resume1: dict[str, str]
    resume2: dict[str, str]
    rule: RaceRule
    aggregator: Aggregator
    anchor: str | None
    race: str | None


@dataclass(frozen=True)
class NormSpec:
    name: str
    model: SCM
    pair: AlignmentPair
    contrast: HighContrast
    outcome: str
    value: str
    aggregator: Aggregator


@dataclass
class Workspace:
    """Everything a document declares, built and cross-checked."""

    models: dict[str, SCM] = field(default_factory=dict)
    alignments: dict[str, Alignment] = field(default_factory=dict)
    quotients: dict[str, QuotientResult] = field(default_factory=dict)
    populations: dict[str, PopulationModel] = field(default_factory=dict)
    projections: dict[str, ResumeProjection] = field(default_factory=dict)
    audits: dict[str, AuditSpec] = field(default_factory=dict)
    normcompares: dict[str, NormSpec] = field(default_factory=dict)

    def merge(self, other: Workspace) -> None:
        for attr in ("models", "alignments", "quotients", "populations", "projections", "audits", "normcompares"):
            getattr(self, attr).update(getattr(other, attr))


class _Sink:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []

    def error(self, message: str, span: SourceSpan, context: str) -> None:
        self.diags.append(Diagnostic("error", message, span, context))


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------- models


def _row_checks(
    rows: Iterable[TableRow], columns: list[tuple[str, tuple[str, ...] | None]], out_name: str,
    out_domain: tuple[str, ...] | None, sink: _Sink, ctx: str,
) -> bool:  # fmt: skip
    """Arity, unknown-value and duplicate checks for table-like rows; True when clean."""
    ok = True
    seen: set[tuple[str, ...]] = set()
    for row in rows:
        if len(row.values) != len(columns):
            sink.error(f"row has {len(row.values)} values, expected {len(columns)}", row.span, ctx)
            ok = False
            continue
        for i, ((col, dom), v) in enumerate(zip(columns, row.values)):
            if dom is not None and v not in dom:
                span = row.value_spans[i] if i < len(row.value_spans) else row.span
                sink.error(f"unknown value for {col}: {v}", span, ctx)
                ok = False
        if out_domain is not None and row.output not in out_domain:
            sink.error(f"unknown value for {out_name}: {row.output}", row.output_span, ctx)
            ok = False
        if row.values in seen:
            sink.error(f"duplicate row ({', '.join(row.values)})", row.span, ctx)
            ok = False
        seen.add(row.values)
    return ok


def _lower_model(d: ModelDecl, sink: _Sink) -> SCM | None:
    ctx = f"model {d.name}"
    spans: dict[str, SourceSpan] = {}
    domains: dict[str, tuple[str, ...]] = {}
    for s in d.body:
        spans.setdefault(s.name, s.span)
        domains.setdefault(s.name, s.domain if isinstance(s, VarStmt) else tuple(v for v, _ in s.distribution))
    dirty: set[str] = set()
    exo, variables, functions = [], [], []
    for s in d.body:
        if isinstance(s, ExogenousStmt):
            exo.append((s.name, list(s.distribution)))
            continue
        variables.append((s.name, s.domain))
        fn = s.function
        if isinstance(fn, CopyFn):
            functions.append((s.name, fn.source))
            continue
        cols = [(p, domains.get(p)) for p in fn.parents]
        if not _row_checks(fn.rows, cols, s.name, s.domain, sink, ctx):
            dirty.add(s.name)
        functions.append((s.name, (fn.parents, {r.values: r.output for r in fn.rows})))
    try:
        return build_scm(exo, variables, functions, name=d.name)
    except ModelBuildError as exc:
        for e in exc.errors:
            if e.subject in dirty and not isinstance(e, CycleDetected):
                continue
            sink.error(_describe(e), spans.get(e.subject or "", d.span), ctx)
    except ModelError as exc:
        sink.error(_describe(exc), spans.get(exc.subject or "", d.span), ctx)
    return None


# ---------------------------------------------------------------- alignments


def _lower_alignment(d: AlignmentDecl, ws: Workspace, broken: set[str], sink: _Sink) -> None:
    ctx = f"alignment {d.name}"
    low = _resolve_model(d.low, d.refs.get("low", d.span), ws, broken, sink, ctx)
    high = None
    if d.quotient is None:
        high = _resolve_model(d.high, d.refs.get("high", d.span), ws, broken, sink, ctx)
    else:
        try:
            agg = Aggregator.parse(d.quotient)
        except ValueError as exc:
            sink.error(str(exc), d.refs.get("aggregator", d.span), ctx)
            return
    if low is None or (d.quotient is None and high is None):
        return

    spans: dict[str, SourceSpan] = {}
    clusters, maps, dropped, domains = {}, {}, [], {}
    clean = True
    for s in d.body:
        if isinstance(s, ClusterStmt):
            spans.setdefault(s.high, s.span)
            unknown = [m for m in s.members if not low.is_endogenous(m)]
            if unknown:
                sink.error(f"cluster {s.high} names unknown low variables {', '.join(unknown)}", s.span, ctx)
                clean = False
                continue
            hdom = s.domain if s.domain is not None else (high.domain(s.high) if high and high.is_endogenous(s.high) else None)
            cols = [(m, low.domain(m)) for m in s.members]
            clean &= _row_checks(s.rows, cols, s.high, hdom, sink, ctx)
            if s.high in clusters:
                sink.error(f"{s.high} is clustered twice", s.span, ctx)
                clean = False
            clusters[s.high] = s.members
            maps[s.high] = {r.values: r.output for r in s.rows}
            if s.domain is not None:
                domains[s.high] = s.domain
        elif isinstance(s, IdentityStmt):
            for v in s.variables:
                spans.setdefault(v, s.span)
                if not low.is_endogenous(v):
                    sink.error(f"identity names unknown low variable {v}", s.span, ctx)
                    clean = False
                    continue
                if v in clusters:
                    sink.error(f"{v} is clustered twice", s.span, ctx)
                    clean = False
                clusters[v] = (v,)
                maps[v] = {(x,): x for x in low.domain(v)}
                domains[v] = low.domain(v)
        elif isinstance(s, DropStmt):
            for v in s.variables:
                spans.setdefault(v, s.span)
            dropped.extend(s.variables)
    if not clean:
        return
    if high is not None:
        for h, dom in list(domains.items()):
            if high.is_endogenous(h) and tuple(dom) != high.domain(h):
                sink.error(f"declared domain of {h} differs from the high model", spans.get(h, d.span), ctx)
                return
        domains = None
    spec = ClusterSpec(clusters, maps, tuple(dropped), domains or None)
    try:
        if d.quotient is not None:
            q = quotient_high_model(low, spec, agg, name=f"{d.name}_high")
            ws.quotients[d.name] = q
            ws.alignments[d.name] = replace(q.alignment, name=d.name)
        else:
            ws.alignments[d.name] = build_alignment(low, high, spec, name=d.name)
    except AlignmentBuildError as exc:
        for e in exc.errors:
            sink.error(_describe(e), spans.get(e.subject or "", d.span), ctx)
    except (AlignmentError, ModelError) as exc:
        sink.error(_describe(exc), spans.get(getattr(exc, "subject", None) or "", d.span), ctx)


def _resolve(table: dict, kind: str, name: str, span: SourceSpan, broken: set[str], sink: _Sink, ctx: str):
    if name in table:
        return table[name]
    if f"{kind}:{name}" not in broken:
        sink.error(f"unknown {kind} {name}", span, ctx)
    return None


def _resolve_model(name, span, ws, broken, sink, ctx) -> SCM | None:
    return _resolve(ws.models, "model", name, span, broken, sink, ctx)


# ---------------------------------------------------------------- studies


def _lower_population(d: PopulationDecl, ws: Workspace, broken: set[str], sink: _Sink) -> None:
    ctx = f"population {d.name}"
    model = _resolve_model(d.model, d.refs.get("model", d.span), ws, broken, sink, ctx)
    if model is None:
        return
    if not model.is_endogenous(d.outcome):
        sink.error(f"unknown variable {d.outcome} in model {d.model}", d.refs.get("outcome", d.span), ctx)
        return
    if d.value not in model.domain(d.outcome):
        sink.error(f"unknown value for {d.outcome}: {d.value}", d.refs.get("value", d.span), ctx)
        return
    ws.populations[d.name] = PopulationModel(model, d.outcome, d.value)


def _lower_projection(d: ProjectionDecl, ws: Workspace, sink: _Sink) -> None:
    try:
        ws.projections[d.name] = ResumeProjection(d.keep)
    except ValueError as exc:
        sink.error(str(exc), d.span, f"projection {d.name}")


def _lower_audit(d: AuditDecl, ws: Workspace, broken: set[str], sink: _Sink) -> None:
    ctx = f"audit {d.name}"
    ref = d.refs.get
    pop = _resolve(ws.populations, "population", d.population, ref("population", d.span), broken, sink, ctx)
    proj = _resolve(ws.projections, "projection", d.projection, ref("projection", d.span), broken, sink, ctx)
    tau = _resolve(ws.alignments, "alignment", d.construction, ref("construction", d.span), broken, sink, ctx)
    try:
        rule = RaceRule(d.rule or RaceRule.MODAL.value)
    except ValueError:
        sink.error(f"unknown race rule {d.rule}; expected modal or probabilistic", ref("rule", d.span), ctx)
        rule = None
    try:
        agg = Aggregator.parse(d.aggregator or "mean")
    except ValueError as exc:
        sink.error(str(exc), ref("aggregator", d.span), ctx)
        agg = None
    if pop is None or proj is None or tau is None or rule is None or agg is None:
        return
    if tau.low != pop.scm:
        sink.error(f"construction {d.construction} is not over the population's model", ref("construction", d.span), ctx)
        return
    try:
        check_outcome_excluded(pop, tau)
    except OutcomeInConstitutiveBasis as exc:
        sink.error(_describe(exc), ref("construction", d.span), ctx)
        return
    try:
        proj.check(pop)
    except (ModelError, AlignmentError) as exc:
        sink.error(_describe(exc), ref("projection", d.span), ctx)
        return
    resumes = []
    for key, pairs in (("resume1", d.resume1), ("resume2", d.resume2)):
        values = dict(pairs)
        try:
            if len(values) != len(pairs):
                raise ValueError("resume repeats an attribute")
            resumes.append(proj.resume(pop, values))
        except (ModelError, ValueError) as exc:
            sink.error(str(exc), ref(key, d.span), ctx)
    if d.anchor is not None and d.anchor not in proj.kept:
        sink.error(f"anchor {d.anchor} is not kept by projection {d.projection}", ref("anchor", d.span), ctx)
        return
    if d.race is not None and d.race not in tau.clusters:
        sink.error(f"race variable {d.race} is not mapped by {d.construction}", ref("race", d.span), ctx)
        return
    if d.race is None and len([h for h in tau.high_vars if h != tau.cluster_of(pop.outcome)]) != 1:
        sink.error("cannot infer the race variable; add a 'race' field", d.span, ctx)
        return
    if len(resumes) == 2:
        ws.audits[d.name] = AuditSpec(d.name, pop, proj, tau, resumes[0], resumes[1], rule, agg, d.anchor, d.race)


def _lower_normcompare(d: NormCompareDecl, ws: Workspace, broken: set[str], sink: _Sink) -> None:
    ctx = f"normcompare {d.name}"
    ref = d.refs.get
    model = _resolve_model(d.model, ref("model", d.span), ws, broken, sink, ctx)
    actual = _resolve(ws.alignments, "alignment", d.actual, ref("actual", d.span), broken, sink, ctx)
    ideal = _resolve(ws.alignments, "alignment", d.ideal, ref("ideal", d.span), broken, sink, ctx)
    try:
        agg = Aggregator.parse(d.aggregator or "mean")
    except ValueError as exc:
        sink.error(str(exc), ref("aggregator", d.span), ctx)
        return
    if model is None or actual is None or ideal is None:
        return
    try:
        pair = AlignmentPair(actual, ideal)
    except AlignmentError as exc:
        sink.error(_describe(exc), ref("ideal", d.span), ctx)
        return
    if pair.low != model:
        sink.error(f"alignments are not over model {d.model}", ref("model", d.span), ctx)
        return
    if d.variable not in actual.clusters:
        sink.error(f"unknown high variable {d.variable}", ref("contrast", d.span), ctx)
        return
    dom = actual.high.domain(d.variable)
    for key, v in (("from_value", d.from_value), ("to_value", d.to_value)):
        if v not in dom:
            sink.error(f"unknown value for {d.variable}: {v}", ref(key, d.span), ctx)
            return
    if d.from_value == d.to_value:
        sink.error("contrast values must differ", ref("to_value", d.span), ctx)
        return
    if not model.is_endogenous(d.outcome):
        sink.error(f"unknown variable {d.outcome} in model {d.model}", ref("outcome", d.span), ctx)
        return
    if d.value not in model.domain(d.outcome):
        sink.error(f"unknown value for {d.outcome}: {d.value}", ref("value", d.span), ctx)
        return
    if d.outcome in actual.clusters[d.variable] or d.outcome in ideal.clusters[d.variable]:
        sink.error(f"outcome {d.outcome} is part of the basis of {d.variable}", ref("outcome", d.span), ctx)
        return
    contrast = HighContrast(d.variable, d.from_value, d.to_value)
    ws.normcompares[d.name] = NormSpec(d.name, model, pair, contrast, d.outcome, d.value, agg)


# ---------------------------------------------------------------- entry points


def lower(doc: Document, base: Workspace | None = None) -> tuple[Workspace, list[Diagnostic]]:
    """Build every declaration; ``base`` supplies declarations from other files."""
    ws = Workspace()
    if base is not None:
        ws.merge(base)
    sink = _Sink()
    broken: set[str] = set()
    seen: set[tuple[str, str]] = set()
    decls = []
    for d in doc.declarations:
        if (d.kind, d.name) in seen:
            sink.error(f"{d.kind} {d.name} is declared more than once", d.span, f"{d.kind} {d.name}")
            continue
        if d.name in getattr(ws, d.kind + "s"):
            sink.error(f"{d.kind} {d.name} is already declared in an earlier file", d.span, f"{d.kind} {d.name}")
            continue
        seen.add((d.kind, d.name))
        decls.append(d)

    # Dependencies only point to earlier kinds, so one pass per kind suffices.
    for d in decls:
        if isinstance(d, ModelDecl):
            scm = _lower_model(d, sink)
            if scm is None:
                broken.add(f"model:{d.name}")
            else:
                ws.models[d.name] = scm
    for d in decls:
        if isinstance(d, AlignmentDecl):
            before = len(sink.diags)
            _lower_alignment(d, ws, broken, sink)
            if d.name not in ws.alignments:
                broken.add(f"alignment:{d.name}")
                upstream = {f"model:{d.low}", f"model:{d.high}"} & broken
                if len(sink.diags) == before and not upstream:
                    sink.error(f"alignment {d.name} could not be built", d.span, f"alignment {d.name}")
    for d in decls:
        if isinstance(d, PopulationDecl):
            _lower_population(d, ws, broken, sink)
            if d.name not in ws.populations:
                broken.add(f"population:{d.name}")
        elif isinstance(d, ProjectionDecl):
            _lower_projection(d, ws, sink)
            if d.name not in ws.projections:
                broken.add(f"projection:{d.name}")
    for d in decls:
        if isinstance(d, AuditDecl):
            _lower_audit(d, ws, broken, sink)
        elif isinstance(d, NormCompareDecl):
            _lower_normcompare(d, ws, broken, sink)
    return ws, sink.diags


def validate(doc: Document) -> list[Diagnostic]:
    """Every semantic failure as a diagnostic; empty iff all declarations build."""
    return lower(doc)[1]
