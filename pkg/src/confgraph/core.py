"""Graph data model: events, literals, propositions, links, and the inference graph.

An inference graph is a DAG over *events*. Each event has a set of mutually
exclusive outcomes; a bare name declares a binary event whose second outcome
is the implicit complement (spelled ``!name``). Multi-outcome events declared
without ``closed`` receive a synthetic catch-all outcome ``other`` so their
listed outcomes need not be exhaustive.

Links connect literals (an outcome or its negation) of two distinct events:

========  =======================================
``a -> b``   probabilistic: p(b|a) > p(b)
``a => b``   logical:       p(b|a) = 1 and p(b|a) > p(b)
``a -/> b``  probabilistic: p(!b|a) > p(!b)
``a =/> b``  logical:       p(!b|a) = 1 and p(!b|a) > p(!b)
========  =======================================

All inequalities are strict, and every outcome of every event must be
possible; graphs whose logical links force some outcome to probability zero
are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import (
    ContradictoryLogicalLinks,
    CycleIntroduced,
    DuplicateEvent,
    DuplicateLink,
    DuplicateOutcome,
    SelfLink,
    UnknownEvent,
    UnknownOutcome,
)

SYNTHETIC_OTHER = "other"


class LinkKind(Enum):
    PROB_POS = "->"
    LOGIC_POS = "=>"
    PROB_NEG = "-/>"
    LOGIC_NEG = "=/>"

    @property
    def is_logical(self) -> bool:
        return self in (LinkKind.LOGIC_POS, LinkKind.LOGIC_NEG)

    @property
    def is_negative(self) -> bool:
        return self in (LinkKind.PROB_NEG, LinkKind.LOGIC_NEG)


@dataclass(frozen=True)
class EventVariable:
    """A random event with named, mutually exclusive, exhaustive outcomes.

    ``closed`` records whether the outcome list was declared exhaustive;
    open multi-outcome events carry the synthetic ``other`` outcome appended
    at declaration time, so the stored outcome tuple always partitions the
    event space.
    """

    name: str
    outcomes: tuple[str, ...]
    closed: bool = True

    @property
    def is_binary(self) -> bool:
        return len(self.outcomes) == 2

    def index(self, outcome: str) -> int:
        try:
            return self.outcomes.index(outcome)
        except ValueError:
            raise UnknownOutcome(f"event {self.name!r} has no outcome {outcome!r}")

    def complement(self, outcome: str) -> str:
        """The other outcome of a binary event."""
        if not self.is_binary:
            raise ValueError(f"event {self.name!r} is not binary")
        a, b = self.outcomes
        return b if outcome == a else a

    def synthetic_outcomes(self) -> frozenset[str]:
        """Outcomes added by normalization rather than declared by the user."""
        synth = set()
        if not self.closed:
            synth.add(SYNTHETIC_OTHER)
        if self.is_binary and self.outcomes[1] == "!" + self.outcomes[0]:
            synth.add(self.outcomes[1])
        return frozenset(synth)


@dataclass(frozen=True, order=True)
class Literal:
    """One outcome of an event, or its negation.

    A negative literal asserts the outcome did *not* occur (the disjunction
    of the event's other outcomes). For binary events the negation of one
    outcome is the other outcome, and literals are canonicalized to the
    positive form by the owning graph.
    """

    event: str
    outcome: str
    positive: bool = True

    def __str__(self) -> str:
        return self.outcome if self.positive else "!" + self.outcome


@dataclass(frozen=True, order=True)
class Proposition:
    """A conjunction of literals over pairwise distinct events."""

    literals: tuple[Literal, ...]

    @staticmethod
    def of(*literals: Literal) -> "Proposition":
        lits = tuple(sorted(set(literals)))
        if not lits:
            raise ValueError("a proposition needs at least one literal")
        events = [l.event for l in lits]
        if len(set(events)) != len(events):
            raise ValueError(f"conjuncts share an event: {lits}")
        return Proposition(lits)

    @property
    def events(self) -> frozenset[str]:
        return frozenset(l.event for l in self.literals)

    @property
    def is_single(self) -> bool:
        return len(self.literals) == 1

    @property
    def single(self) -> Literal:
        if not self.is_single:
            raise ValueError(f"{self} is not a single literal")
        return self.literals[0]

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return " & ".join(str(l) for l in self.literals)


PropositionLike = Union[Literal, Proposition]


def as_proposition(p: PropositionLike) -> Proposition:
    return p if isinstance(p, Proposition) else Proposition.of(p)


@dataclass(frozen=True)
class Link:
    source: Literal
    target: Literal
    kind: LinkKind

    def sort_key(self) -> tuple:
        return (str(self.source), str(self.target), self.kind.value)

    def __str__(self) -> str:
        return f"{self.source} {self.kind.value} {self.target}"


class InferenceGraph:
    """Immutable container of events and links, with derived indexes.

    Instances built through :class:`GraphBuilder` are structurally valid
    (acyclic, no duplicate or contradictory links). The raw constructor does
    not validate, which tests and :func:`validate` rely on.
    """

    __slots__ = (
        "events",
        "links",
        "_by_name",
        "_outcome_owner",
        "_parents",
        "_children",
        "_implications",
        "_memo",
        "_hash",
    )

    def __init__(self, events: Iterable[EventVariable], links: Iterable[Link]):
        self.events: tuple[EventVariable, ...] = tuple(events)
        self.links: tuple[Link, ...] = tuple(links)
        self._by_name = {e.name: e for e in self.events}
        self._outcome_owner: dict[str, str] = {}
        for e in self.events:
            for o in e.outcomes:
                if o not in e.synthetic_outcomes():
                    self._outcome_owner.setdefault(o, e.name)
        self._parents: dict[str, set[str]] = {e.name: set() for e in self.events}
        self._children: dict[str, set[str]] = {e.name: set() for e in self.events}
        for link in self.links:
            if link.source.event in self._children and link.target.event in self._parents:
                self._children[link.source.event].add(link.target.event)
                self._parents[link.target.event].add(link.source.event)
        self._implications: Optional[dict[Literal, tuple[Literal, ...]]] = None
        self._memo: dict = {}
        self._hash = hash((frozenset(self.events), frozenset(self.links)))

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InferenceGraph)
            and frozenset(self.events) == frozenset(other.events)
            and frozenset(self.links) == frozenset(other.links)
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"InferenceGraph({len(self.events)} events, {len(self.links)} links)"

    # -- lookups ----------------------------------------------------------

    @property
    def event_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.events)

    def event(self, name: str) -> EventVariable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownEvent(f"no event named {name!r}")

    def has_event(self, name: str) -> bool:
        return name in self._by_name

    def owner_of_outcome(self, outcome: str) -> Optional[str]:
        """Event owning a (non-synthetic) outcome name, if any."""
        return self._outcome_owner.get(outcome)

    def parents_of(self, name: str) -> frozenset[str]:
        return frozenset(self._parents.get(name, ()))

    def children_of(self, name: str) -> frozenset[str]:
        return frozenset(self._children.get(name, ()))

    # -- literals ---------------------------------------------------------

    def canonical(self, lit: Literal) -> Literal:
        """Canonical form: negations on binary events flip to the complement."""
        ev = self.event(lit.event)
        ev.index(lit.outcome)
        if not lit.positive and ev.is_binary:
            return Literal(ev.name, ev.complement(lit.outcome), True)
        return lit

    def negate(self, lit: Literal) -> Literal:
        ev = self.event(lit.event)
        if ev.is_binary:
            if not lit.positive:
                return Literal(ev.name, lit.outcome, True)
            return Literal(ev.name, ev.complement(lit.outcome), True)
        return Literal(ev.name, lit.outcome, not lit.positive)

    def literal(self, outcome_or_event: str, positive: bool = True) -> Literal:
        """Resolve a bare name to a canonical literal.

        The name may be a declared outcome, or the name of an event that has
        an outcome of the same name (the implicit-binary pattern).
        """
        owner = self.owner_of_outcome(outcome_or_event)
        if owner is None:
            ev = self.event(outcome_or_event)
            if outcome_or_event not in ev.outcomes:
                raise UnknownOutcome(
                    f"{outcome_or_event!r} names a multi-outcome event; "
                    f"refer to one of its outcomes {ev.outcomes}"
                )
            owner = ev.name
        lit = Literal(owner, outcome_or_event, True)
        return self.canonical(lit) if positive else self.canonical(self.negate(lit))

    def all_literals(self, include_synthetic: bool = False) -> tuple[Literal, ...]:
        """Every canonical literal of the graph, in a deterministic order.

        Synthetic outcomes (binary complements are kept, catch-all ``other``
        is not) are excluded by default because the surface language cannot
        name them.
        """
        out: list[Literal] = []
        for e in sorted(self.events, key=lambda e: e.name):
            synth = e.synthetic_outcomes()
            for o in e.outcomes:
                if not include_synthetic and o == SYNTHETIC_OTHER and o in synth:
                    continue
                out.append(Literal(e.name, o, True))
                if not e.is_binary:
                    out.append(Literal(e.name, o, False))
        return tuple(out)

    # -- logical structure --------------------------------------------------

    def implication_edges(self) -> dict[Literal, tuple[Literal, ...]]:
        """Literal implications induced by logical links, with contrapositives.

        ``a => b`` contributes a -> b and !b -> !a; ``a =/> b`` contributes
        a -> !b and b -> !a. All literals canonical.
        """
        if self._implications is None:
            edges: dict[Literal, list[Literal]] = {}

            def add(src: Literal, dst: Literal) -> None:
                edges.setdefault(src, []).append(dst)

            for link in self.links:
                if not link.kind.is_logical:
                    continue
                src = self.canonical(link.source)
                tgt = self.canonical(link.target)
                if link.kind is LinkKind.LOGIC_NEG:
                    tgt = self.negate(tgt)
                add(src, tgt)
                add(self.negate(tgt), self.negate(src))
            self._implications = {k: tuple(v) for k, v in edges.items()}
        return self._implications


# ---------------------------------------------------------------------------
# Deterministic propagation over logical links.
# ---------------------------------------------------------------------------


@dataclass
class Propagation:
    """Result of closing a set of literals under logical implications.

    ``ok`` is False when the literals force a contradiction (the conjunction
    has probability zero in every distribution consistent with the graph).
    ``pinned`` maps events that are forced to a single outcome; ``excluded``
    maps events to outcomes known not to occur.
    """

    ok: bool
    pinned: dict[str, str] = field(default_factory=dict)
    excluded: dict[str, set[str]] = field(default_factory=dict)

    def satisfies(self, lit: Literal) -> bool:
        if lit.positive:
            return self.pinned.get(lit.event) == lit.outcome
        p = self.pinned.get(lit.event)
        if p is not None:
            return p != lit.outcome
        return lit.outcome in self.excluded.get(lit.event, ())


def propagate(g: InferenceGraph, literals: Iterable[Literal]) -> Propagation:
    """Unit-propagate literals through logical links and outcome exclusivity."""
    key = ("propagate", tuple(sorted(g.canonical(l) for l in literals)))
    cached = g._memo.get(key)
    if cached is not None:
        return cached

    state = Propagation(ok=True)
    impl = g.implication_edges()
    queue: list[Literal] = [g.canonical(l) for l in key[1]]

    def assert_literal(lit: Literal) -> bool:
        """Returns False on contradiction; appends consequences to the queue."""
        ev = g.event(lit.event)
        if state.satisfies(lit):
            return True
        if lit.positive:
            pinned = state.pinned.get(ev.name)
            if pinned is not None and pinned != lit.outcome:
                return False
            if lit.outcome in state.excluded.get(ev.name, ()):
                return False
            state.pinned[ev.name] = lit.outcome
            for o in ev.outcomes:
                if o != lit.outcome:
                    state.excluded.setdefault(ev.name, set()).add(o)
        else:
            if state.pinned.get(ev.name) == lit.outcome:
                return False
            exc = state.excluded.setdefault(ev.name, set())
            exc.add(lit.outcome)
            remaining = [o for o in ev.outcomes if o not in exc]
            if not remaining:
                return False
            if len(remaining) == 1 and ev.name not in state.pinned:
                # outcomes are exhaustive, so the last one standing is forced
                queue.append(Literal(ev.name, remaining[0], True))
        # fire implications whose source just became satisfied
        for src, targets in impl.items():
            if src.event == ev.name and state.satisfies(src):
                queue.extend(targets)
        return True

    while queue:
        lit = queue.pop()
        if not assert_literal(lit):
            state = Propagation(ok=False)
            break

    g._memo[key] = state
    return state


def possible(g: InferenceGraph, prop: PropositionLike) -> bool:
    """Whether the conjunction can have positive probability under the logical links."""
    return propagate(g, as_proposition(prop).literals).ok


def pinned_events(g: InferenceGraph, prop: PropositionLike) -> frozenset[str]:
    """Events forced to a single outcome when the proposition holds."""
    res = propagate(g, as_proposition(prop).literals)
    if not res.ok:
        return frozenset()
    return frozenset(res.pinned)


def entails(g: InferenceGraph, a: PropositionLike, b: PropositionLike) -> bool:
    """True when ``b`` follows from ``a`` under the logical-link closure.

    Covers reflexivity, transitivity, contrapositives (valid because every
    event outcome is possible), propositional subsumption (a & b entails a),
    and outcome exclusivity within an event.
    """
    pa, pb = as_proposition(a), as_proposition(b)
    key = ("entails", pa, pb)
    cached = g._memo.get(key)
    if cached is None:
        res = propagate(g, pa.literals)
        cached = (not res.ok) or all(res.satisfies(g.canonical(l)) for l in pb.literals)
        g._memo[key] = cached
    return cached


# ---------------------------------------------------------------------------
# Construction and validation.
# ---------------------------------------------------------------------------


def _normalize_event(name: str, outcomes: Optional[Sequence[str]], closed: Optional[bool]) -> EventVariable:
    outs = list(outcomes) if outcomes else [name]
    if len(outs) != len(set(outs)):
        dup = next(o for o in outs if outs.count(o) > 1)
        raise DuplicateOutcome(f"outcome {dup!r} listed twice for event {name!r}")
    if len(outs) == 1:
        # implicit binary event: the complement outcome is spelled !o
        return EventVariable(name, (outs[0], "!" + outs[0]), True)
    if closed:
        return EventVariable(name, tuple(outs), True)
    if SYNTHETIC_OTHER in outs:
        raise DuplicateOutcome(
            f"event {name!r}: outcome {SYNTHETIC_OTHER!r} collides with the "
            "synthetic catch-all; declare the event closed or rename it"
        )
    return EventVariable(name, tuple(outs) + (SYNTHETIC_OTHER,), False)


class GraphBuilder:
    """Mutable assembler for inference graphs; not thread-safe."""

    def __init__(self) -> None:
        self._events: dict[str, EventVariable] = {}
        self._links: list[Link] = []
        self._names: set[str] = set()  # event + addressable outcome names

    def add_event(
        self,
        name: str,
        outcomes: Optional[Sequence[str]] = None,
        closed: Optional[bool] = None,
    ) -> EventVariable:
        if name in self._events:
            raise DuplicateEvent(f"event {name!r} already declared")
        ev = _normalize_event(name, outcomes, closed)
        taken = self._names & ({ev.name} | (set(ev.outcomes) - ev.synthetic_outcomes()))
        if taken:
            raise DuplicateOutcome(
                f"name {sorted(taken)[0]!r} already in use by another event"
            )
        self._events[name] = ev
        self._names.add(ev.name)
        self._names.update(set(ev.outcomes) - ev.synthetic_outcomes())
        return ev

    def ensure_binary(self, name: str) -> EventVariable:
        """Auto-declare a binary event on first mention."""
        if name in self._events:
            return self._events[name]
        return self.add_event(name)

    def has_event(self, name: str) -> bool:
        return name in self._events

    def resolve_literal(self, name: str, positive: bool = True, auto_declare: bool = True) -> Literal:
        """Map a bare name to a canonical literal, optionally declaring a
        binary event on first mention."""
        owner: Optional[EventVariable] = None
        for ev in self._events.values():
            if name == ev.name or (name in ev.outcomes and name not in ev.synthetic_outcomes()):
                owner = ev
                break
        if owner is None:
            if not auto_declare:
                raise UnknownEvent(f"unknown name {name!r}")
            owner = self.add_event(name)
        if name not in owner.outcomes:
            raise UnknownOutcome(
                f"{name!r} names a multi-outcome event; refer to one of its outcomes "
                + ", ".join(o for o in owner.outcomes if o not in owner.synthetic_outcomes())
            )
        if positive:
            return Literal(owner.name, name, True)
        if owner.is_binary:
            return Literal(owner.name, owner.complement(name), True)
        return Literal(owner.name, name, False)

    def graph(self) -> InferenceGraph:
        return InferenceGraph(self._events.values(), self._links)

    def add_link(self, source: Literal, target: Literal, kind: LinkKind) -> Link:
        g = self.graph()
        source = g.canonical(source)
        target = g.canonical(target)
        if source.event == target.event:
            raise SelfLink(f"link endpoints share event {source.event!r}")
        for link in self._links:
            if link.source == source and link.target == target:
                raise DuplicateLink(f"a link {source} .. {target} already exists")
        candidate = Link(source, target, kind)
        new = InferenceGraph(self._events.values(), self._links + [candidate])
        cycle = _find_cycle(new)
        if cycle:
            raise CycleIntroduced(
                "link would close the cycle " + " -> ".join(cycle + [cycle[0]])
            )
        if kind.is_logical:
            bad = _impossible_literals(new)
            if bad:
                raise ContradictoryLogicalLinks(
                    f"logical links would make {bad[0]} impossible"
                )
        self._links.append(candidate)
        return candidate

    def build(self) -> InferenceGraph:
        g = self.graph()
        report = validate(g)
        if not report.is_valid:
            raise report.findings[0].to_error()
        return g


def add_link(g: InferenceGraph, source: Literal, target: Literal, kind: LinkKind) -> InferenceGraph:
    """Functional link addition: returns a new graph, the input is untouched."""
    b = GraphBuilder()
    for e in g.events:
        b._events[e.name] = e
        b._names.add(e.name)
        b._names.update(set(e.outcomes) - e.synthetic_outcomes())
    b._links = list(g.links)
    b.add_link(source, target, kind)
    return b.graph()


def _find_cycle(g: InferenceGraph) -> Optional[list[str]]:
    """A directed cycle over events, if one exists (DFS, deterministic)."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in g.event_names}
    stack: list[str] = []

    def visit(n: str) -> Optional[list[str]]:
        color[n] = GRAY
        stack.append(n)
        for m in sorted(g.children_of(n)):
            if color[m] == GRAY:
                return stack[stack.index(m):]
            if color[m] == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in sorted(color):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


def _impossible_literals(g: InferenceGraph) -> list[Literal]:
    """Positive literals forced to probability zero by the logical links."""
    bad = []
    for e in sorted(g.events, key=lambda e: e.name):
        for o in e.outcomes:
            if not propagate(g, [Literal(e.name, o, True)]).ok:
                bad.append(Literal(e.name, o, True))
    return bad


_ERROR_BY_CODE = {
    "cycle": CycleIntroduced,
    "contradiction": ContradictoryLogicalLinks,
    "duplicate-link": DuplicateLink,
    "self-link": SelfLink,
    "dangling-literal": UnknownOutcome,
}


@dataclass(frozen=True)
class Finding:
    code: str
    message: str

    def to_error(self) -> Exception:
        return _ERROR_BY_CODE.get(self.code, Exception)(self.message)


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def is_valid(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        if self.is_valid:
            return "ok"
        return "\n".join(f"{f.code}: {f.message}" for f in self.findings)


def validate(g: InferenceGraph) -> ValidationReport:
    """Structural well-formedness report; an empty report means valid."""
    findings: list[Finding] = []
    for link in g.links:
        for lit in (link.source, link.target):
            if not g.has_event(lit.event):
                findings.append(Finding("dangling-literal", f"{lit} references unknown event {lit.event!r}"))
            elif lit.outcome not in g.event(lit.event).outcomes:
                findings.append(Finding("dangling-literal", f"{lit} references unknown outcome {lit.outcome!r}"))
        if g.has_event(link.source.event) and link.source.event == link.target.event:
            findings.append(Finding("self-link", f"{link} loops on one event"))
    if findings:
        return ValidationReport(tuple(findings))

    seen: set[tuple[Literal, Literal]] = set()
    for link in g.links:
        pair = (g.canonical(link.source), g.canonical(link.target))
        if pair in seen:
            findings.append(Finding("duplicate-link", f"more than one link {pair[0]} .. {pair[1]}"))
        seen.add(pair)

    cycle = _find_cycle(g)
    if cycle:
        findings.append(Finding("cycle", " -> ".join(cycle + [cycle[0]])))
    else:
        for lit in _impossible_literals(g):
            findings.append(Finding("contradiction", f"logical links force {lit} to be impossible"))
    return ValidationReport(tuple(findings))


def topological_order(g: InferenceGraph) -> list[str]:
    """Kahn's algorithm with name tie-breaks, so the order is reproducible."""
    indeg = {n: len(g.parents_of(n)) for n in g.event_names}
    ready = sorted(n for n, d in indeg.items() if d == 0)
    out: list[str] = []
    while ready:
        n = ready.pop(0)
        out.append(n)
        for m in sorted(g.children_of(n)):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
        ready.sort()
    if len(out) != len(indeg):
        raise CycleIntroduced("graph contains a directed cycle")
    return out
