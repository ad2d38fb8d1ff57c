"""The CASL declaration language: parse, validate, serialize and load."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .convert import alignment_decl, model_decl
from .lower import AuditSpec, NormSpec, Workspace, lower, validate
from .serialize import canonicalize, format_rational, serialize
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
    TableFn,
    TableRow,
    VarStmt,
    parse_syntax,
    tokenize,
)


class DocumentError(ValueError):
    """A source failed to parse or validate; ``diagnostics`` holds the details."""

    def __init__(self, diagnostics: list[Diagnostic], source: str = "") -> None:
        self.diagnostics = list(diagnostics)
        self.source = source
        head = f"{source}: " if source else ""
        super().__init__("\n".join(head + str(d) for d in self.diagnostics))


def parse(text: str) -> tuple[Document, list[Diagnostic]]:
    """Parse a source; semantic diagnostics are added when the syntax is clean."""
    doc, diags = parse_syntax(text)
    if not diags:
        diags = validate(doc)
    return doc, diags


def load_text(text: str, source: str = "", base: Workspace | None = None) -> Workspace:
    doc, diags = parse_syntax(text)
    if diags:
        raise DocumentError(diags, source)
    ws, diags = lower(doc, base)
    if diags:
        raise DocumentError(diags, source)
    return ws


def load_files(paths: Iterable[str | Path]) -> Workspace:
    """Load several files into one workspace; later files may refer to earlier ones."""
    ws = Workspace()
    for p in paths:
        p = Path(p)
        ws = load_text(p.read_text(encoding="utf-8"), str(p), ws)
    return ws


__all__ = [
    "AlignmentDecl",
    "AuditDecl",
    "AuditSpec",
    "ClusterStmt",
    "CopyFn",
    "Diagnostic",
    "Document",
    "DocumentError",
    "DropStmt",
    "ExogenousStmt",
    "IdentityStmt",
    "ModelDecl",
    "NormCompareDecl",
    "NormSpec",
    "PopulationDecl",
    "ProjectionDecl",
    "SourceSpan",
    "TableFn",
    "TableRow",
    "VarStmt",
    "Workspace",
    "alignment_decl",
    "canonicalize",
    "format_rational",
    "load_files",
    "load_text",
    "lower",
    "model_decl",
    "parse",
    "parse_syntax",
    "serialize",
    "tokenize",
    "validate",
]
