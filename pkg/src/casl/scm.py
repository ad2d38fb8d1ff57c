"""Finite discrete structural causal models with exact rational inference.

Every probability is a :class:`fractions.Fraction`, so distributions can be
compared for equality instead of within a tolerance. Models are validated on
construction and immutable afterwards.
"""

from __future__ import annotations

import contextvars
import heapq
import itertools
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

Row = tuple[str, ...]
ProbLike = Union[Fraction, int, str, float]
TableLike = Union[Mapping[Any, str], Callable[..., str]]

DEFAULT_CAP = 2**20

_cap: contextvars.ContextVar[int] = contextvars.ContextVar("enumeration_cap", default=DEFAULT_CAP)


@contextmanager
def enumeration_cap(limit: int) -> Iterator[None]:
    """Temporarily change the joint exogenous state cap for exact enumeration."""
    token = _cap.set(int(limit))
    try:
        yield
    finally:
        _cap.reset(token)


def current_cap() -> int:
    return _cap.get()


def to_fraction(p: ProbLike) -> Fraction:
    """Exact rational from ``1/3``, ``0.25``, ints, Fractions or floats.

    Floats go through their shortest decimal repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(p, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    if isinstance(p, float):
        return Fraction(repr(p))
    if isinstance(p, str):
        return Fraction(p.strip())
    raise TypeError(f"cannot interpret {p!r} as a probability")


# ---------------------------------------------------------------- errors


class ModelError(ValueError):
    """Base class for model construction and query failures.

    ``subject`` names the variable (or declaration) the failure is about, so
    front-ends can attach source locations.
    """

    def __init__(self, message: str, subject: str | None = None) -> None:
        super().__init__(message)
        self.subject = subject


class DuplicateName(ModelError):
    pass


class UnknownReference(ModelError):
    pass


class MissingFunction(ModelError):
    pass


class DomainError(ModelError):
    pass


class BadProbabilitySum(ModelError):
    pass


class CycleDetected(ModelError):
    def __init__(self, cycle: Sequence[str]) -> None:
        self.cycle = tuple(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle), subject=self.cycle[0])


class NonExhaustiveTable(ModelError):
    def __init__(self, target: str, parents: Sequence[str], missing: Sequence[Row]) -> None:
        self.target = target
        self.parents = tuple(parents)
        self.missing = tuple(missing)
        shown = ", ".join(_fmt_row(self.parents, r) for r in self.missing[:3])
        more = f" (+{len(self.missing) - 3} more)" if len(self.missing) > 3 else ""
        super().__init__(f"table for {target} has no row for {shown}{more}", subject=target)


class ModelBuildError(ModelError):
    """All validation failures found while building one model."""

    def __init__(self, errors: Sequence[ModelError], name: str = "") -> None:
        self.errors = list(errors)
        label = f"model {name!r}" if name else "model"
        lines = "\n".join(f"  - {type(e).__name__}: {e}" for e in self.errors)
        super().__init__(f"{label} is invalid:\n{lines}", subject=name or None)

    def kinds(self) -> set[type]:
        return {type(e) for e in self.errors}


class UnknownVariable(ModelError):
    pass


class InvalidIntervention(ModelError):
    pass


class InvalidAssignment(ModelError):
    pass


class EnumerationCapExceeded(ModelError):
    def __init__(self, required: int, cap: int) -> None:
        self.required = required
        self.cap = cap
        super().__init__(
            f"exact enumeration needs {required} exogenous states, cap is {cap}; "
            "raise the cap or use the Monte Carlo estimator"
        )


def _fmt_row(names: Sequence[str], row: Row) -> str:
    return "(" + ", ".join(f"{n}={v}" for n, v in zip(names, row)) + ")"


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: tuple[str, ...]


@dataclass(frozen=True)
class ExogenousDecl:
    name: str
    distribution: tuple[tuple[str, Fraction], ...]

    @property
    def domain(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.distribution)

    def prob(self, value: str) -> Fraction:
        return dict(self.distribution).get(value, Fraction(0))


@dataclass(frozen=True)
class StructuralFunction:
    """Extensional table mapping joint parent values to a target value."""

    target: str
    parents: tuple[str, ...]
    rows: tuple[tuple[Row, str], ...]
    _table: dict[Row, str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows)))
        object.__setattr__(self, "_table", dict(self.rows))

    @property
    def table(self) -> Mapping[Row, str]:
        return self._table

    def __call__(self, parent_values: Row) -> str:
        return self._table[parent_values]


@dataclass(frozen=True)
class Intervention:
    """A ``do`` operation: a finite map from variables to fixed values.

    Items are kept sorted by variable name, which makes interventions
    hashable, comparable and lexicographically ordered.
    """

    items: tuple[tuple[str, str], ...] = ()

    def __init__(self, assignments: Mapping[str, str] | Iterable[tuple[str, str]] = (), **kwargs: str) -> None:
        pairs = list(assignments.items()) if isinstance(assignments, Mapping) else list(assignments)
        pairs += list(kwargs.items())
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise InvalidIntervention(f"variable assigned twice in {pairs}")
        object.__setattr__(self, "items", tuple(sorted((str(n), str(v)) for n, v in pairs)))

    def __lt__(self, other: Intervention) -> bool:
        return self.items < other.items

    def __le__(self, other: Intervention) -> bool:
        return self.items <= other.items

    def __bool__(self) -> bool:
        return bool(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, var: object) -> bool:
        return any(n == var for n, _ in self.items)

    def __getitem__(self, var: str) -> str:
        for n, v in self.items:
            if n == var:
                return v
        raise KeyError(var)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.items)

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def merge(self, other: Intervention) -> Intervention:
        return Intervention(self.items + other.items)

    def __str__(self) -> str:
        return "do(" + ", ".join(f"{n}={v}" for n, v in self.items) + ")"

    @classmethod
    def parse(cls, text: str) -> Intervention:
        """Parse ``"A=a, B=b"`` or ``"do(A=a)"``; an empty string is the empty do."""
        text = text.strip()
        if text.startswith("do(") and text.endswith(")"):
            text = text[3:-1]
        pairs = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            if "=" not in part:
                raise InvalidIntervention(f"expected VAR=VALUE, got {part!r}")
            name, value = (s.strip() for s in part.split("=", 1))
            pairs.append((name, value))
        return cls(pairs)


EMPTY = Intervention()


# ---------------------------------------------------------------- distributions


@dataclass(frozen=True, eq=False)
class Distribution:
    """Exact probability table over joint assignments of ``scope``.

    Zero-weight rows are dropped. Equality ignores the order of ``scope``.
    """

    scope: tuple[str, ...]
    weights: Mapping[Row, Fraction]

    def __post_init__(self) -> None:
        scope = tuple(self.scope)
        if len(set(scope)) != len(scope):
            raise ModelError(f"repeated variable in scope {scope}")
        cleaned: dict[Row, Fraction] = {}
        for row, w in self.weights.items():
            w = to_fraction(w)
            if w < 0:
                raise BadProbabilitySum(f"negative weight {w} for {row}")
            if len(row) != len(scope):
                raise ModelError(f"row {row} does not match scope {scope}")
            if w:
                cleaned[tuple(row)] = cleaned.get(tuple(row), Fraction(0)) + w
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise BadProbabilitySum(f"distribution weights sum to {total}, not 1")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "weights", dict(sorted(cleaned.items())))

    @classmethod
    def point_mass(cls, assignment: Mapping[str, str], scope: Sequence[str] | None = None) -> Distribution:
        scope = tuple(scope) if scope is not None else tuple(assignment)
        return cls(scope, {tuple(assignment[v] for v in scope): Fraction(1)})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        if set(self.scope) != set(other.scope):
            return False
        return self.weights == other.reorder(self.scope).weights

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        rows = ", ".join(f"{r}: {w}" for r, w in self.weights.items())
        return f"Distribution({self.scope}, {{{rows}}})"

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def assignments(self) -> Iterator[tuple[dict[str, str], Fraction]]:
        for row, w in self.weights.items():
            yield dict(zip(self.scope, row)), w

    def _index(self, names: Iterable[str]) -> list[int]:
        pos = {n: i for i, n in enumerate(self.scope)}
        out = []
        for n in names:
            if n not in pos:
                raise UnknownVariable(f"{n} is not in scope {self.scope}", subject=n)
            out.append(pos[n])
        return out

    def reorder(self, scope: Sequence[str]) -> Distribution:
        scope = tuple(scope)
        if scope == self.scope:
            return self
        if set(scope) != set(self.scope) or len(scope) != len(self.scope):
            raise UnknownVariable(f"cannot reorder {self.scope} as {scope}")
        idx = self._index(scope)
        return Distribution(scope, {tuple(r[i] for i in idx): w for r, w in self.weights.items()})

    def marginal(self, variables: Sequence[str]) -> Distribution:
        variables = tuple(variables)
        idx = self._index(variables)
        acc: dict[Row, Fraction] = {}
        for row, w in self.weights.items():
            key = tuple(row[i] for i in idx)
            acc[key] = acc.get(key, Fraction(0)) + w
        return Distribution(variables, acc)

    def probability(self, event: Mapping[str, str] | None = None, **kwargs: str) -> Fraction:
        """Mass of the rows matching a partial assignment."""
        event = {**(event or {}), **kwargs}
        idx = self._index(event)
        wanted = [str(v) for v in event.values()]
        return sum(
            (w for row, w in self.weights.items() if all(row[i] == v for i, v in zip(idx, wanted))),
            Fraction(0),
        )

    def condition(self, event: Mapping[str, str]) -> tuple[Distribution | None, Fraction]:
        """Conditional distribution given a partial assignment, and the event's mass.

        Returns ``(None, 0)`` for a zero-mass event.
        """
        idx = self._index(event)
        wanted = [str(v) for v in event.values()]
        kept = {r: w for r, w in self.weights.items() if all(r[i] == v for i, v in zip(idx, wanted))}
        mass = sum(kept.values(), Fraction(0))
        if mass == 0:
            return None, Fraction(0)
        return Distribution(self.scope, {r: w / mass for r, w in kept.items()}), mass

    def map_rows(self, scope: Sequence[str], fn: Callable[[dict[str, str]], Row]) -> Distribution:
        """Push this table through ``fn`` (assignment -> row over ``scope``)."""
        acc: dict[Row, Fraction] = {}
        for assignment, w in self.assignments():
            key = fn(assignment)
            acc[key] = acc.get(key, Fraction(0)) + w
        return Distribution(tuple(scope), acc)


def query_marginal(d: Distribution, variables: Sequence[str]) -> Distribution:
    return d.marginal(variables)


def total_variation(p: Distribution, q: Distribution) -> Fraction:
    """Half the L1 distance between two tables over the same variables."""
    if set(p.scope) != set(q.scope):
        raise UnknownVariable(f"scopes differ: {p.scope} vs {q.scope}")
    q = q.reorder(p.scope)
    rows = set(p.weights) | set(q.weights)
    zero = Fraction(0)
    return sum((abs(p.weights.get(r, zero) - q.weights.get(r, zero)) for r in rows), zero) / 2


# ---------------------------------------------------------------- models


@dataclass(frozen=True, eq=False)
class SCM:
    """A validated, acyclic, finite structural causal model.

    Build one with :func:`build_scm`. Exogenous variables are mutually
    independent; shared noise is modelled as a common exogenous parent.
    """

    exogenous: tuple[ExogenousDecl, ...]
    endogenous: tuple[VariableDecl, ...]
    functions: tuple[StructuralFunction, ...]
    name: str = ""
    order: tuple[str, ...] = field(init=False)
    _domains: dict[str, tuple[str, ...]] = field(init=False, repr=False)
    _functions: dict[str, StructuralFunction] = field(init=False, repr=False)
    _exo: dict[str, ExogenousDecl] = field(init=False, repr=False)
    _cache: dict[Intervention, Distribution] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exogenous", tuple(sorted(self.exogenous, key=lambda d: d.name)))
        object.__setattr__(self, "endogenous", tuple(sorted(self.endogenous, key=lambda d: d.name)))
        object.__setattr__(self, "functions", tuple(sorted(self.functions, key=lambda f: f.target)))
        errors = _validate(self.exogenous, self.endogenous, self.functions)
        if errors:
            raise ModelBuildError(errors, self.name)
        domains = {d.name: d.domain for d in self.exogenous}
        domains.update({d.name: d.domain for d in self.endogenous})
        object.__setattr__(self, "_domains", domains)
        object.__setattr__(self, "_functions", {f.target: f for f in self.functions})
        object.__setattr__(self, "_exo", {d.name: d for d in self.exogenous})
        object.__setattr__(self, "order", _topological_order(self.endogenous, self._functions))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SCM):
            return NotImplemented
        return (self.exogenous, self.endogenous, self.functions) == (
            other.exogenous,
            other.endogenous,
            other.functions,
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def endogenous_names(self) -> tuple[str, ...]:
        return self.order

    @property
    def exogenous_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.exogenous)

    def domain(self, var: str) -> tuple[str, ...]:
        try:
            return self._domains[var]
        except KeyError:
            raise UnknownVariable(f"no variable {var!r} in model {self.name!r}", subject=var) from None

    def function(self, var: str) -> StructuralFunction:
        return self._functions[var]

    def exogenous_decl(self, var: str) -> ExogenousDecl:
        return self._exo[var]

    def is_endogenous(self, var: str) -> bool:
        return var in self._functions

    def parents(self, var: str) -> tuple[str, ...]:
        return self._functions[var].parents

    def check_intervention(self, iv: Intervention) -> None:
        for var, value in iv.items:
            if var not in self._functions:
                raise InvalidIntervention(f"cannot intervene on {var!r}: not an endogenous variable", subject=var)
            if value not in self._domains[var]:
                raise InvalidIntervention(f"{value!r} is not in the domain of {var}", subject=var)

    def check_assignment(self, values: Mapping[str, str], variables: Sequence[str]) -> None:
        for var in variables:
            if var not in values:
                raise InvalidAssignment(f"assignment is missing {var}", subject=var)
            if values[var] not in self.domain(var):
                raise InvalidAssignment(f"{values[var]!r} is not in the domain of {var}", subject=var)
        extra = set(values) - set(variables)
        if extra:
            raise InvalidAssignment(f"unexpected variables {sorted(extra)}")

    def joint_states(self, iv: Intervention = EMPTY) -> int:
        return math.prod(len(self._exo[u].domain) for u in self._relevant_exogenous(iv))

    def _relevant_exogenous(self, iv: Intervention) -> list[str]:
        fixed = set(iv.variables)
        used = {p for f in self.functions if f.target not in fixed for p in f.parents if p in self._exo}
        return sorted(used)

    def _fill(self, values: dict[str, str], fixed: Mapping[str, str]) -> dict[str, str]:
        for var in self.order:
            if var in fixed:
                values[var] = fixed[var]
            else:
                f = self._functions[var]
                values[var] = f._table[tuple(values[p] for p in f.parents)]
        return values


def _validate(
    exogenous: Sequence[ExogenousDecl],
    endogenous: Sequence[VariableDecl],
    functions: Sequence[StructuralFunction],
) -> list[ModelError]:
    errors: list[ModelError] = []
    domains: dict[str, tuple[str, ...]] = {}
    for decl in list(exogenous) + list(endogenous):
        if decl.name in domains:
            errors.append(DuplicateName(f"variable {decl.name} declared twice", subject=decl.name))
        dom = decl.domain
        if not dom:
            errors.append(DomainError(f"{decl.name} has an empty domain", subject=decl.name))
        if len(set(dom)) != len(dom):
            errors.append(DuplicateName(f"{decl.name} repeats a domain value", subject=decl.name))
        domains[decl.name] = dom
    for decl in exogenous:
        probs = [p for _, p in decl.distribution]
        if any(p < 0 for p in probs):
            errors.append(BadProbabilitySum(f"{decl.name} has a negative probability", subject=decl.name))
        total = sum(probs, Fraction(0))
        if total != 1:
            errors.append(BadProbabilitySum(f"probabilities of {decl.name} sum to {total}, not 1", subject=decl.name))

    endo_names = {d.name for d in endogenous}
    seen: set[str] = set()
    for f in functions:
        if f.target in seen:
            errors.append(DuplicateName(f"{f.target} has more than one function", subject=f.target))
            continue
        seen.add(f.target)
        if f.target not in endo_names:
            errors.append(UnknownReference(f"function for undeclared variable {f.target}", subject=f.target))
            continue
        if f.target in f.parents:
            errors.append(CycleDetected([f.target, f.target]))
            continue
        bad = [p for p in f.parents if p not in domains]
        if bad:
            errors.append(UnknownReference(f"{f.target} refers to unknown {', '.join(bad)}", subject=f.target))
            continue
        if len(set(f.parents)) != len(f.parents):
            errors.append(DuplicateName(f"{f.target} lists a parent twice", subject=f.target))
            continue
        pdoms = [domains[p] for p in f.parents]
        for row, out in f.rows:
            if len(row) != len(f.parents) or any(v not in d for v, d in zip(row, pdoms)):
                errors.append(DomainError(f"row {row} of {f.target} is outside the parent domains", subject=f.target))
            if out not in domains[f.target]:
                errors.append(DomainError(f"{out!r} is not a value of {f.target}", subject=f.target))
        missing = [r for r in itertools.product(*pdoms) if r not in f.table]
        if missing:
            errors.append(NonExhaustiveTable(f.target, f.parents, missing))
    for name in sorted(endo_names - seen):
        errors.append(MissingFunction(f"{name} has no structural function", subject=name))
    if not any(isinstance(e, (UnknownReference, CycleDetected)) for e in errors):
        cycle = _find_cycle({f.target: [p for p in f.parents if p in endo_names] for f in functions})
        if cycle:
            errors.append(CycleDetected(cycle))
    return errors


def _find_cycle(parents: Mapping[str, Sequence[str]]) -> list[str] | None:
    """Return a dependency cycle ``[a, b, ..., a]`` (a depends on b ...), if any."""
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 1
        stack.append(node)
        for p in sorted(parents.get(node, ())):
            if state.get(p) == 1:
                return stack[stack.index(p):] + [p]
            if p not in state:
                found = visit(p)
                if found:
                    return found
        stack.pop()
        state[node] = 2
        return None

    for node in sorted(parents):
        if node not in state:
            found = visit(node)
            if found:
                return found
    return None


def _topological_order(
    endogenous: Sequence[VariableDecl], functions: Mapping[str, StructuralFunction]
) -> tuple[str, ...]:
    names = {d.name for d in endogenous}
    indegree = {n: 0 for n in names}
    children: dict[str, list[str]] = {n: [] for n in names}
    for n in names:
        for p in functions[n].parents:
            if p in names:
                indegree[n] += 1
                children[p].append(n)
    heap = [n for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in children[n]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(heap, c)
    return tuple(order)


def _pairs(obj: Mapping[str, Any] | Iterable[tuple[str, Any]]) -> list[tuple[str, Any]]:
    return list(obj.items()) if isinstance(obj, Mapping) else [tuple(p) for p in obj]  # type: ignore[misc]


def _row_key(key: Any) -> Row:
    if isinstance(key, tuple):
        return tuple(str(k) for k in key)
    return (str(key),)


def build_scm(
    exogenous: Mapping[str, Mapping[str, ProbLike]] | Iterable[tuple[str, Mapping[str, ProbLike]]],
    variables: Mapping[str, Sequence[str]] | Iterable[tuple[str, Sequence[str]]],
    functions: Mapping[str, Any] | Iterable[tuple[str, Any]],
    name: str = "",
) -> SCM:
    """Validate a raw declaration and return an :class:`SCM`.

    ``functions`` maps each endogenous variable to either the name of an
    exogenous variable (the variable copies it) or a ``(parents, table)``
    pair, where ``table`` is a mapping from parent-value tuples to values or
    a callable that is expanded over the parent-domain product.

    Raises :class:`ModelBuildError` listing every failure found.
    """
    errors: list[ModelError] = []
    exo_decls = []
    for ename, dist in _pairs(exogenous):
        try:
            items = tuple((str(v), to_fraction(p)) for v, p in _pairs(dist))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            errors.append(BadProbabilitySum(f"{ename}: {exc}", subject=ename))
            items = ()
        exo_decls.append(ExogenousDecl(str(ename), items))
    var_decls = [VariableDecl(str(n), tuple(str(v) for v in dom)) for n, dom in _pairs(variables)]
    domains = {d.name: d.domain for d in exo_decls}
    domains.update({d.name: d.domain for d in var_decls})

    fns = []
    for target, spec in _pairs(functions):
        target = str(target)
        if isinstance(spec, str):
            if spec not in domains:
                errors.append(UnknownReference(f"{target} copies unknown variable {spec}", subject=target))
                continue
            fns.append(StructuralFunction(target, (spec,), tuple(((v,), v) for v in domains[spec])))
            continue
        parents, table = spec
        parents = (parents,) if isinstance(parents, str) else tuple(str(p) for p in parents)
        if callable(table):
            if any(p not in domains for p in parents):
                errors.append(UnknownReference(f"{target} refers to an unknown parent", subject=target))
                continue
            rows = tuple((r, str(table(*r))) for r in itertools.product(*(domains[p] for p in parents)))
        else:
            keys = [_row_key(k) for k in table]
            if len(set(keys)) != len(keys):
                errors.append(DuplicateName(f"table for {target} repeats a row", subject=target))
            rows = tuple((k, str(v)) for k, v in zip(keys, table.values()))
        fns.append(StructuralFunction(target, parents, rows))
    if errors:
        raise ModelBuildError(errors, name)
    return SCM(tuple(exo_decls), tuple(var_decls), tuple(fns), name=name)


# ---------------------------------------------------------------- inference


def _as_intervention(iv: Intervention | Mapping[str, str] | None) -> Intervention:
    if iv is None:
        return EMPTY
    return iv if isinstance(iv, Intervention) else Intervention(iv)


def evaluate_world(
    scm: SCM, exo: Mapping[str, str], iv: Intervention | Mapping[str, str] | None = None
) -> dict[str, str]:
    """Endogenous values for one exogenous setting, with do-values overriding functions."""
    iv = _as_intervention(iv)
    scm.check_intervention(iv)
    scm.check_assignment(exo, scm.exogenous_names)
    values = scm._fill(dict(exo), iv.as_dict())
    return {v: values[v] for v in scm.order}


def unit_counterfactual(
    scm: SCM, exo: Mapping[str, str], iv: Intervention | Mapping[str, str] | None, query: str
) -> str:
    if not scm.is_endogenous(query):
        raise UnknownVariable(f"{query} is not endogenous", subject=query)
    return evaluate_world(scm, exo, iv)[query]


def interventional_distribution(
    scm: SCM, iv: Intervention | Mapping[str, str] | None = None, cap: int | None = None
) -> Distribution:
    """Exact distribution over all endogenous variables under ``do(iv)``.

    Only exogenous variables feeding a non-intervened function are
    enumerated; the rest marginalise out. Results are cached per model.
    """
    iv = _as_intervention(iv)
    scm.check_intervention(iv)
    cached = scm._cache.get(iv)
    if cached is not None:
        return cached
    cap = current_cap() if cap is None else cap
    relevant = scm._relevant_exogenous(iv)
    required = scm.joint_states(iv)
    if required > cap:
        raise EnumerationCapExceeded(required, cap)
    supports = [[(v, p) for v, p in scm._exo[u].distribution if p] for u in relevant]
    fixed = iv.as_dict()
    acc: dict[Row, Fraction] = {}
    values: dict[str, str] = {}
    for combo in itertools.product(*supports):
        weight = Fraction(1)
        for u, (v, p) in zip(relevant, combo):
            values[u] = v
            weight *= p
        scm._fill(values, fixed)
        key = tuple(values[v] for v in scm.order)
        acc[key] = acc.get(key, Fraction(0)) + weight
    dist = Distribution(scm.order, acc)
    scm._cache[iv] = dist
    return dist


def observational_distribution(scm: SCM, cap: int | None = None) -> Distribution:
    return interventional_distribution(scm, EMPTY, cap=cap)


def effect_contrast(
    scm: SCM,
    iv1: Intervention | Mapping[str, str],
    iv2: Intervention | Mapping[str, str],
    outcome: str,
    value: str,
) -> Fraction:
    """``P[outcome=value | do(iv1)] - P[outcome=value | do(iv2)]``."""
    if not scm.is_endogenous(outcome):
        raise UnknownVariable(f"{outcome} is not endogenous", subject=outcome)
    if value not in scm.domain(outcome):
        raise DomainError(f"{value!r} is not a value of {outcome}", subject=outcome)
    p1 = interventional_distribution(scm, iv1).probability({outcome: value})
    p2 = interventional_distribution(scm, iv2).probability({outcome: value})
    return p1 - p2


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int


@dataclass(frozen=True)
class SampledDistribution:
    """Monte Carlo frequencies; use when exact enumeration exceeds the cap."""

    scope: tuple[str, ...]
    counts: Mapping[Row, int]
    n: int
    seed: int

    def probability(self, event: Mapping[str, str] | None = None, **kwargs: str) -> Estimate:
        event = {**(event or {}), **kwargs}
        idx = [self.scope.index(v) for v in event]
        hits = sum(c for r, c in self.counts.items() if all(r[i] == str(x) for i, x in zip(idx, event.values())))
        p = hits / self.n
        return Estimate(p, math.sqrt(p * (1 - p) / self.n), self.n)


def sample_distribution(
    scm: SCM, iv: Intervention | Mapping[str, str] | None = None, n: int = 10_000, seed: int = 0
) -> SampledDistribution:
    """Seeded Monte Carlo estimate of the interventional distribution."""
    iv = _as_intervention(iv)
    scm.check_intervention(iv)
    rng = np.random.default_rng(seed)
    draws = {}
    for decl in scm.exogenous:
        probs = np.array([float(p) for _, p in decl.distribution])
        draws[decl.name] = rng.choice(len(probs), size=n, p=probs / probs.sum())
    fixed = iv.as_dict()
    counts: dict[Row, int] = {}
    for i in range(n):
        values = {d.name: d.distribution[draws[d.name][i]][0] for d in scm.exogenous}
        scm._fill(values, fixed)
        key = tuple(values[v] for v in scm.order)
        counts[key] = counts.get(key, 0) + 1
    return SampledDistribution(scm.order, dict(sorted(counts.items())), n, seed)
