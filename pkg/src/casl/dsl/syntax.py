"""Lexer, document tree and recovering parser for ``.casl`` sources."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union


@dataclass(frozen=True)
class SourceSpan:
    """1-based line and column plus a positive length in characters."""

    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


NOSPAN = SourceSpan(1, 1, 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    span: SourceSpan
    context: str = ""

    def __str__(self) -> str:
        where = f" (in {self.context})" if self.context else ""
        return f"{self.span}: {self.severity}: {self.message}{where}"


def _span() -> SourceSpan:
    return field(default=NOSPAN, compare=False, repr=False)


def _refs() -> Mapping[str, SourceSpan]:
    return field(default_factory=dict, compare=False, repr=False)


# ---------------------------------------------------------------- tree
# Spans never take part in equality, so documents compare structurally.


@dataclass(frozen=True)
class ExogenousStmt:
    name: str
    distribution: tuple[tuple[str, Fraction], ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class CopyFn:
    source: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class TableRow:
    values: tuple[str, ...]
    output: str
    span: SourceSpan = _span()
    value_spans: tuple[SourceSpan, ...] = field(default=(), compare=False, repr=False)
    output_span: SourceSpan = _span()


@dataclass(frozen=True)
class TableFn:
    parents: tuple[str, ...]
    rows: tuple[TableRow, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class VarStmt:
    name: str
    domain: tuple[str, ...]
    function: Union[CopyFn, TableFn]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ModelDecl:
    name: str
    body: tuple[Union[ExogenousStmt, VarStmt], ...]
    span: SourceSpan = _span()

    kind = "model"


@dataclass(frozen=True)
class ClusterStmt:
    high: str
    domain: tuple[str, ...] | None
    members: tuple[str, ...]
    rows: tuple[TableRow, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class IdentityStmt:
    variables: tuple[str, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class DropStmt:
    variables: tuple[str, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class AlignmentDecl:
    """``high`` is a model name, or None when ``quotient`` names the aggregator of a constructed high model."""

    name: str
    low: str
    high: str | None
    quotient: str | None
    body: tuple[Union[ClusterStmt, IdentityStmt, DropStmt], ...]
    span: SourceSpan = _span()
    refs: Mapping[str, SourceSpan] = _refs()

    kind = "alignment"


@dataclass(frozen=True)
class PopulationDecl:
    name: str
    model: str
    outcome: str
    value: str
    span: SourceSpan = _span()
    refs: Mapping[str, SourceSpan] = _refs()

    kind = "population"


@dataclass(frozen=True)
class ProjectionDecl:
    name: str
    keep: tuple[str, ...]
    span: SourceSpan = _span()
    refs: Mapping[str, SourceSpan] = _refs()

    kind = "projection"


@dataclass(frozen=True)
class AuditDecl:
    name: str
    population: str
    projection: str
    construction: str
    resume1: tuple[tuple[str, str], ...]
    resume2: tuple[tuple[str, str], ...]
    rule: str | None = None
    aggregator: str | None = None
    anchor: str | None = None
    race: str | None = None
    span: SourceSpan = _span()
    refs: Mapping[str, SourceSpan] = _refs()

    kind = "audit"


@dataclass(frozen=True)
class NormCompareDecl:
    name: str
    model: str
    actual: str
    ideal: str
    variable: str
    from_value: str
    to_value: str
    outcome: str
    value: str
    aggregator: str | None = None
    span: SourceSpan = _span()
    refs: Mapping[str, SourceSpan] = _refs()

    kind = "normcompare"


Declaration = Union[ModelDecl, AlignmentDecl, PopulationDecl, ProjectionDecl, AuditDecl, NormCompareDecl]
BLOCKS = ("model", "alignment", "population", "projection", "audit", "normcompare")


@dataclass(frozen=True)
class Document:
    declarations: tuple[Declaration, ...] = ()

    def of_kind(self, kind: str) -> list[Declaration]:
        return [d for d in self.declarations if d.kind == kind]

    def find(self, kind: str, name: str) -> Declaration | None:
        return next((d for d in self.declarations if d.kind == kind and d.name == name), None)


# ---------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str  # ident, number, punct, eof
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.text)))


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<number>[0-9]+(?:\.[0-9]+)?)"
    r"|(?P<punct>->|[{}():,=/])"
)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    text = text.replace("\r\n", "\n")
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            diags.append(
                Diagnostic("error", f"unexpected character {text[pos]!r}", SourceSpan(line, pos - start + 1, 1))
            )
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("ident", "number", "punct"):
            tokens.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    last = tokens[-1] if tokens else None
    eof_span = (last.line, last.column) if last else (1, 1)
    tokens.append(Token("eof", "", *eof_span))
    return tokens, diags


# ---------------------------------------------------------------- parser


class _SyntaxError(Exception):
    def __init__(self, message: str, token: Token) -> None:
        super().__init__(message)
        self.token = token


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.toks = tokens
        self.pos = 0
        self.last = tokens[0]

    # -- primitives

    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
            self.last = tok
        return tok

    def fail(self, expected: str) -> _SyntaxError:
        tok = self.peek()
        span_tok = self.last if tok.kind == "eof" else tok
        return _SyntaxError(f"expected {expected} but found {_describe(tok)}", span_tok)

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "ident") and tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        return self.advance()

    def ident(self, what: str = "a name") -> Token:
        if self.peek().kind != "ident":
            raise self.fail(what)
        return self.advance()

    def value(self) -> Token:
        tok = self.peek()
        if tok.kind == "ident" or (tok.kind == "number" and "." not in tok.text):
            return self.advance()
        raise self.fail("a value")

    def rational(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "number":
            raise self.fail("a probability")
        self.advance()
        if self.at("/"):
            if "." in tok.text:
                raise _SyntaxError("a fraction cannot have a decimal numerator", tok)
            self.advance()
            den = self.peek()
            if den.kind != "number" or "." in den.text:
                raise self.fail("an integer denominator")
            self.advance()
            if int(den.text) == 0:
                raise _SyntaxError("zero denominator", den)
            return Fraction(int(tok.text), int(den.text))
        return Fraction(tok.text)

    def separated(self, item, close: str) -> list:
        """Comma-separated items up to ``close``; a trailing comma is allowed."""
        out = []
        while not self.at(close):
            out.append(item())
            if self.at(","):
                self.advance()
            elif not self.at(close):
                raise self.fail(f"',' or {close!r}")
        self.advance()
        return out

    def names(self, close: str) -> tuple[str, ...]:
        return tuple(t.text for t in self.separated(self.ident, close))

    def bare_names(self) -> tuple[list[Token], SourceSpan]:
        """``a, b, c`` without brackets (used by ``keep``, ``drop`` and ``identity``)."""
        first = self.ident("a variable name")
        toks = [first]
        while self.at(","):
            self.advance()
            toks.append(self.ident("a variable name"))
        return toks, first.span

    def assignment(self) -> tuple[Token, Token]:
        var = self.ident("a variable name")
        self.expect("=")
        return var, self.value()

    # -- blocks

    def document(self, diags: list[Diagnostic]) -> Document:
        decls: list[Declaration] = []
        while self.peek().kind != "eof":
            start = self.pos
            tok = self.peek()
            try:
                if tok.kind != "ident" or tok.text not in BLOCKS:
                    if tok.kind == "ident":
                        raise _SyntaxError(f"unknown block {tok.text!r}; expected one of {', '.join(BLOCKS)}", tok)
                    raise self.fail("a declaration")
                decls.append(getattr(self, "p_" + tok.text)())
            except _SyntaxError as exc:
                context = ""
                if self.toks[start].kind == "ident" and start + 1 < len(self.toks):
                    context = f"{self.toks[start].text} {self.toks[start + 1].text}"
                diags.append(Diagnostic("error", str(exc), exc.token.span, context.strip()))
                self.recover(start)
        return Document(tuple(decls))

    def recover(self, start: int) -> None:
        """Skip to the end of the broken top-level block."""
        i = start
        while i < len(self.toks) and not (self.toks[i].kind == "punct" and self.toks[i].text == "{"):
            if i > start and self.toks[i].kind == "ident" and self.toks[i].text in BLOCKS and self.toks[i].column == 1:
                self.pos = i
                return
            i += 1
        depth = 0
        for j in range(i, len(self.toks)):
            t = self.toks[j]
            if t.kind == "punct" and t.text == "{":
                depth += 1
            elif t.kind == "punct" and t.text == "}":
                depth -= 1
                if depth == 0:
                    self.pos = j + 1
                    return
        # Unbalanced: resume at the next block keyword in column 1.
        for j in range(max(self.pos, start) + 1, len(self.toks)):
            t = self.toks[j]
            if t.kind == "ident" and t.text in BLOCKS and t.column == 1:
                self.pos = j
                return
        self.pos = len(self.toks) - 1

    def p_model(self) -> ModelDecl:
        self.expect("model")
        name = self.ident("a model name")
        self.expect("{")
        body: list[Union[ExogenousStmt, VarStmt]] = []
        while not self.at("}"):
            if self.at("exogenous"):
                body.append(self.p_exogenous())
            elif self.at("var"):
                body.append(self.p_var())
            else:
                raise self.fail("'exogenous', 'var' or '}'")
        self.advance()
        return ModelDecl(name.text, tuple(body), name.span)

    def p_exogenous(self) -> ExogenousStmt:
        self.expect("exogenous")
        name = self.ident("an exogenous variable name")
        self.expect("{")

        def entry() -> tuple[str, Fraction]:
            v = self.value()
            self.expect(":")
            return v.text, self.rational()

        return ExogenousStmt(name.text, tuple(self.separated(entry, "}")), name.span)

    def p_var(self) -> VarStmt:
        self.expect("var")
        name = self.ident("a variable name")
        self.expect(":")
        self.expect("{")
        domain = tuple(t.text for t in self.separated(self.value, "}"))
        self.expect("=")
        if self.at("table") and self.peek(1).text == "(":
            tab = self.advance()
            self.expect("(")
            parents = self.names(")")
            fn: Union[CopyFn, TableFn] = TableFn(parents, self.p_rows(), tab.span)
        else:
            src = self.ident("'table(...)' or an exogenous variable name")
            fn = CopyFn(src.text, src.span)
        return VarStmt(name.text, domain, fn, name.span)

    def p_rows(self) -> tuple[TableRow, ...]:
        self.expect("{")

        def row() -> TableRow:
            open_ = self.expect("(")
            vals = self.separated(self.value, ")")
            self.expect("->")
            out = self.value()
            return TableRow(
                tuple(v.text for v in vals), out.text, open_.span, tuple(v.span for v in vals), out.span
            )

        return tuple(self.separated(row, "}"))

    def p_alignment(self) -> AlignmentDecl:
        self.expect("alignment")
        name = self.ident("an alignment name")
        self.expect(":")
        low = self.ident("a low model name")
        self.expect("->")
        refs = {"low": low.span}
        high_tok = self.ident("a high model name or 'quotient(...)'")
        high: str | None = high_tok.text
        quotient = None
        refs["high"] = high_tok.span
        if high_tok.text == "quotient" and self.at("("):
            self.advance()
            agg = self.ident("an aggregator")
            self.expect(")")
            high, quotient = None, agg.text
            refs["aggregator"] = agg.span
        self.expect("{")
        body: list[Union[ClusterStmt, IdentityStmt, DropStmt]] = []
        while not self.at("}"):
            if self.at("cluster"):
                body.append(self.p_cluster())
            elif self.at("identity"):
                self.advance()
                toks, span = self.bare_names()
                body.append(IdentityStmt(tuple(t.text for t in toks), span))
            elif self.at("drop"):
                self.advance()
                toks, span = self.bare_names()
                body.append(DropStmt(tuple(t.text for t in toks), span))
            else:
                raise self.fail("'cluster', 'identity', 'drop' or '}'")
        self.advance()
        return AlignmentDecl(name.text, low.text, high, quotient, tuple(body), name.span, refs)

    def p_cluster(self) -> ClusterStmt:
        self.expect("cluster")
        high = self.ident("a high variable name")
        domain = None
        if self.at(":"):
            self.advance()
            self.expect("{")
            domain = tuple(t.text for t in self.separated(self.value, "}"))
        self.expect("from")
        self.expect("(")
        members = self.names(")")
        return ClusterStmt(high.text, domain, members, self.p_rows(), high.span)

    def p_population(self) -> PopulationDecl:
        self.expect("population")
        name = self.ident("a population name")
        self.expect("{")
        fields = self.p_fields({"model": "ref", "outcome": "assign"}, required=("model", "outcome"))
        (var, val), refs = fields["outcome"], {}
        refs.update(model=fields["model"].span, outcome=var.span, value=val.span)
        return PopulationDecl(name.text, fields["model"].text, var.text, val.text, name.span, refs)

    def p_projection(self) -> ProjectionDecl:
        self.expect("projection")
        name = self.ident("a projection name")
        self.expect("{")
        self.expect("keep")
        toks, span = self.bare_names()
        self.expect("}")
        refs = {t.text: t.span for t in toks}
        return ProjectionDecl(name.text, tuple(t.text for t in toks), name.span, refs)

    def p_audit(self) -> AuditDecl:
        self.expect("audit")
        name = self.ident("an audit name")
        self.expect("{")
        spec = {
            "population": "ref",
            "projection": "ref",
            "construction": "ref",
            "resume1": "resume",
            "resume2": "resume",
            "rule": "ref",
            "aggregator": "ref",
            "anchor": "ref",
            "race": "ref",
        }
        f = self.p_fields(spec, required=("population", "projection", "construction", "resume1", "resume2"))
        refs = {k: (v[1] if isinstance(v, tuple) else v.span) for k, v in f.items()}

        def text(key: str) -> str | None:
            return f[key].text if key in f else None

        return AuditDecl(
            name.text,
            text("population"),
            text("projection"),
            text("construction"),
            f["resume1"][0],
            f["resume2"][0],
            text("rule"),
            text("aggregator"),
            text("anchor"),
            text("race"),
            name.span,
            refs,
        )

    def p_normcompare(self) -> NormCompareDecl:
        self.expect("normcompare")
        name = self.ident("a comparison name")
        self.expect("{")
        spec = {"model": "ref", "actual": "ref", "ideal": "ref", "contrast": "contrast", "outcome": "assign", "aggregator": "ref"}
        f = self.p_fields(spec, required=("model", "actual", "ideal", "contrast", "outcome"))
        var, v1, v2 = f["contrast"]
        out, val = f["outcome"]
        refs = {k: f[k].span for k in ("model", "actual", "ideal", "aggregator") if k in f}
        refs.update(contrast=var.span, from_value=v1.span, to_value=v2.span, outcome=out.span, value=val.span)
        agg = f["aggregator"].text if "aggregator" in f else None
        return NormCompareDecl(
            name.text, f["model"].text, f["actual"].text, f["ideal"].text,
            var.text, v1.text, v2.text, out.text, val.text, agg, name.span, refs,
        )  # fmt: skip

    def p_fields(self, spec: Mapping[str, str], required: tuple[str, ...]) -> dict:
        """Keyword fields in any order, each at most once, closed by ``}``."""
        out: dict = {}
        while not self.at("}"):
            key = self.peek()
            if key.kind != "ident" or key.text not in spec:
                raise self.fail("one of " + ", ".join(spec))
            if key.text in out:
                raise _SyntaxError(f"field {key.text!r} given twice", key)
            self.advance()
            shape = spec[key.text]
            if shape == "ref":
                out[key.text] = self.ident(f"a value for {key.text}")
            elif shape == "assign":
                out[key.text] = self.assignment()
            elif shape == "resume":
                open_ = self.expect("(")
                pairs = self.separated(self.assignment, ")")
                out[key.text] = (tuple((v.text, x.text) for v, x in pairs), open_.span)
            else:  # contrast
                var = self.ident("a high variable name")
                self.expect(":")
                v1 = self.value()
                self.expect("->")
                out[key.text] = (var, v1, self.value())
        close = self.advance()
        missing = [k for k in required if k not in out]
        if missing:
            raise _SyntaxError(f"missing field {missing[0]!r}", close)
        return out


def parse_syntax(text: str) -> tuple[Document, list[Diagnostic]]:
    """Parse without semantic checks; syntax errors come back as diagnostics."""
    tokens, diags = tokenize(text)
    doc = _Parser(tokens).document(diags)
    diags.sort(key=lambda d: (d.span.line, d.span.column))
    return doc, diags
