from __future__ import annotations

import random
import re
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from casl import fixtures as F
from casl.abstraction import AggregationError, Aggregator, quotient_high_model
from casl.dsl import (
    Document,
    DocumentError,
    ModelDecl,
    PopulationDecl,
    ProjectionDecl,
    TableFn,
    alignment_decl,
    canonicalize,
    load_files,
    load_text,
    model_decl,
    parse,
    serialize,
)
from casl.generators import random_cluster_spec, random_scm

rngs = st.randoms(use_true_random=False)
CORPUS = sorted(F.corpus_dir().glob("*.casl"))
MALFORMED = sorted((Path(__file__).parent / "corpus" / "malformed").glob("*.casl"))


def in_bounds(text: str, span) -> bool:
    """Spans sit on a real line and may point at most one past its last character."""
    lines = text.replace("\r\n", "\n").split("\n")
    if not 1 <= span.line <= len(lines) or span.length < 1 or span.column < 1:
        return False
    return span.column + span.length - 1 <= len(lines[span.line - 1]) + 1


# ---------------------------------------------------------------- corpus


def test_corpus_is_large_enough():
    assert len(CORPUS) >= 8 and len(MALFORMED) >= 10


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_corpus_validates_and_round_trips(path: Path):
    text = path.read_text(encoding="utf-8")
    doc, diags = parse(text)
    assert diags == []
    once = serialize(doc)
    again, diags = parse(once)
    assert diags == [] and again == canonicalize(doc)
    assert serialize(again) == once
    assert text.split("\n", 2)[2] == once  # corpus files are canonical below their header


def test_corpus_is_current():
    import sys

    sys.path.insert(0, str(Path(__file__).parents[1] / "scripts"))
    import export_corpus

    for key, doc in export_corpus.documents().items():
        assert (F.corpus_dir() / f"{key}.casl").read_text(encoding="utf-8") == export_corpus.render(key, doc)


def test_bird_document_shape():
    doc, _ = parse((F.corpus_dir() / "bird.casl").read_text())
    assert len(doc.of_kind("model")) == 2 and len(doc.of_kind("alignment")) == 1


def test_corpus_lowers_to_fixtures():
    ws = load_files([F.corpus_dir() / "bird.casl"])
    assert ws.models["bird_low"] == F.bird_low()
    assert ws.alignments["tau_color"] == F.tau_color()
    ws = load_files([F.corpus_dir() / "audit.casl"])
    assert ws.models["audit_low"] == F.audit_low() and ws.alignments["tau_sc"] == F.tau_sc()
    ws = load_files([F.corpus_dir() / "ambiguity.casl"])
    assert ws.alignments["tau_sc"] == F.tau_ambiguity()
    ws = load_files([F.corpus_dir() / "coins.casl"])
    actual, ideal = F.coins_alignments()
    assert ws.alignments["tau_actual"] == actual and ws.alignments["tau_ideal"] == ideal


@pytest.mark.parametrize("path", MALFORMED, ids=lambda p: p.stem)
def test_malformed_corpus_reports_spans(path: Path):
    text = path.read_text(encoding="utf-8")
    _, diags = parse(text)
    assert diags and all(d.severity == "error" for d in diags)
    assert all(in_bounds(text, d.span) for d in diags)


# ---------------------------------------------------------------- diagnostics


def _diag(name: str):
    text = (Path(__file__).parent / "corpus" / "malformed" / f"{name}.casl").read_text()
    _, diags = parse(text)
    return text, diags


def test_missing_comma_points_at_the_token():
    text, (d,) = _diag("missing_comma")
    line = text.split("\n")[d.span.line - 1]
    assert line.lstrip().startswith("var Pecking")
    assert line[d.span.column - 1 : d.span.column - 1 + d.span.length] == "no"


def test_value_typo():
    text, (d,) = _diag("value_typo")
    assert "unknown value for Fine" in d.message
    assert text.split("\n")[d.span.line - 1][d.span.column - 1 :].startswith("turqoise")


def test_cycle_carries_path():
    _, (d,) = _diag("cycle")
    assert "CycleDetected" in d.message and "A -> B -> A" in d.message


def test_outcome_in_basis_through_audit():
    _, diags = _diag("outcome_in_basis")
    assert any("OutcomeInConstitutiveBasis" in d.message for d in diags)


def test_unknown_block_is_an_error():
    _, (d,) = _diag("unknown_block")
    assert "unknown block" in d.message and d.span.line == 1


def test_recovery_reports_each_broken_block():
    text = (
        "model a {\n  exogenous U { x: 1 }\n  var X : {x y} = U\n}\n\n"
        "model b {\n  exogenous U { x: 1/2 }\n  var X : {x} = U\n}\n\n"
        "model c {\n  exogenous U { x: 1 }\n  var X : {x x x} = U\n}\n"
    )
    doc, diags = parse(text)
    assert [d.span.line for d in diags] == [3, 13]  # semantic checks wait for clean syntax
    assert [d.name for d in doc.of_kind("model")] == ["b"]
    _, diags = parse(text.replace("{x y}", "{x, y}").replace("{x x x}", "{x}"))
    assert [d.span.line for d in diags] == [7]


def test_load_text_raises_with_diagnostics():
    with pytest.raises(DocumentError) as exc:
        load_text((Path(__file__).parent / "corpus" / "malformed" / "cycle.casl").read_text(), "cycle.casl")
    assert exc.value.diagnostics and str(exc.value).startswith("cycle.casl: ")


def test_files_may_refer_to_earlier_files(tmp_path: Path):
    text = (F.corpus_dir() / "bird.casl").read_text()
    models, alignment = text.split("alignment")
    (tmp_path / "models.casl").write_text(models)
    (tmp_path / "tau.casl").write_text("alignment" + alignment)
    ws = load_files([tmp_path / "models.casl", tmp_path / "tau.casl"])
    assert ws.alignments["tau_color"] == F.tau_color()
    with pytest.raises(DocumentError):
        load_files([tmp_path / "tau.casl"])


# ---------------------------------------------------------------- canonical form


def test_decimals_become_rationals():
    doc, diags = parse("model m {\n  exogenous U { a: 0.5, b: 0.25, c: 1/4 }\n  var A : {a, b, c} = U\n}\n")
    assert diags == []
    assert "exogenous U { a: 1/2, b: 1/4, c: 1/4 }" in serialize(doc)


def test_crlf_is_accepted_and_lf_emitted():
    text = (F.corpus_dir() / "bird.casl").read_text()
    doc, diags = parse(text.replace("\n", "\r\n"))
    assert diags == [] and "\r" not in serialize(doc)
    assert doc == parse(text)[0]


def test_rows_are_sorted():
    text = "model m {\n  exogenous U { b: 1/2, a: 1/2 }\n  var A : {a, b} = table(U) {\n    (b) -> b,\n    (a) -> a,\n  }\n}\n"
    doc, diags = parse(text)
    assert diags == []
    out = serialize(doc)
    assert out.index("(a) -> a") < out.index("(b) -> b")
    assert "exogenous U { b: 1/2, a: 1/2 }" in out  # declared order of values is meaningful and kept


# ---------------------------------------------------------------- generated documents


def _generated(rng: random.Random) -> Document:
    low = random_scm(rng, n_endo=rng.randint(2, 5), name="low")
    spec = random_cluster_spec(rng, low, keep=(low.order[-1],))
    agg = rng.choice(["mean", "uniform", "min", "max"])
    try:
        a = quotient_high_model(low, spec, Aggregator.parse(agg), name="tau").alignment
    except AggregationError:  # min/max can leave a parent setting with no mass at all
        agg = "mean"
        a = quotient_high_model(low, spec, name="tau").alignment
    outcome = low.order[-1]
    others = [v for v in low.endogenous_names if v != outcome]
    return Document(
        (
            model_decl(low),
            alignment_decl(a, "low", quotient=agg, name="tau"),
            PopulationDecl("pop", "low", outcome, "1"),
            ProjectionDecl("resume", tuple(rng.sample(others, rng.randint(1, len(others))))),
        )
    )


def _shuffle_rows(rng: random.Random, doc: Document) -> Document:
    out = []
    for d in doc.declarations:
        if isinstance(d, ModelDecl):
            body = []
            for s in d.body:
                if hasattr(s, "function") and isinstance(s.function, TableFn):
                    rows = list(s.function.rows)
                    rng.shuffle(rows)
                    s = replace(s, function=replace(s.function, rows=tuple(rows)))
                body.append(s)
            d = replace(d, body=tuple(body))
        out.append(d)
    return Document(tuple(out))


def _decimal(match: re.Match) -> str:
    p = Fraction(int(match.group(1)), int(match.group(2)))
    d = p.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    return str(float(p)) if d == 1 else match.group(0)


def _messy(rng: random.Random, text: str) -> str:
    lines = []
    for line in text.split("\n"):
        if "exogenous" in line:
            line = re.sub(r"(\d+)/(\d+)", _decimal, line)
        line = " " * rng.randint(0, 4) + line.strip() + " " * rng.randint(0, 2)
        if rng.random() < 0.2:
            line += "  # note"
        lines.append(line)
    sep = "\r\n" if rng.random() < 0.5 else "\n"
    return sep.join(lines)


@given(rngs)
def test_generated_documents_round_trip(rng: random.Random):
    doc = _generated(rng)
    text = serialize(doc)
    parsed, diags = parse(text)
    assert diags == []
    assert parsed == canonicalize(doc)
    assert serialize(parsed) == text


@given(rngs)
def test_serializer_is_idempotent_on_noisy_text(rng: random.Random):
    doc = _generated(rng)
    canonical = serialize(doc)
    shuffled = serialize(_shuffle_rows(rng, doc))
    assert shuffled == canonical
    noisy, diags = parse(_messy(rng, canonical))
    assert diags == []
    assert serialize(noisy) == canonical


@given(rngs)
def test_generated_documents_lower_to_their_models(rng: random.Random):
    doc = _generated(rng)
    ws = load_text(serialize(doc))
    low = ws.models["low"]
    assert ws.alignments["tau"].low == low
    assert "pop" in ws.populations and "resume" in ws.projections
