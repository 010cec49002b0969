"""Textual graph language (.igr) and the query language.

Graph files::

    # comments run to end of line
    event stance { hawk, dove }.        # open: gains a catch-all outcome
    event coin { heads, tails } closed. # closed: outcomes are exhaustive
    bird -> fly.                        # p(fly|bird) > p(fly)
    emu => bird.                        # p(bird|emu) = 1, strict shift
    emu -/> fly.                        # p(!fly|emu) > p(!fly)
    quaker =/> hawk.                    # p(!hawk|quaker) = 1, strict shift
    !fly -> grounded.                   # literals may be negated

A bare name on an undeclared event auto-declares a binary event, so small
files need no declarations at all; multi-outcome events must be declared
before their outcomes are used. ``event`` and ``closed`` are reserved words.

Queries::

    conf(fly, bird)?
    conf(!gray, royal & african)?

Parsing never raises on bad input: every failure is reported as a
:class:`ParseDiagnostic` with a source span inside the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import (
    GraphBuilder,
    InferenceGraph,
    LinkKind,
    Literal,
    Proposition,
    SYNTHETIC_OTHER,
)
from .errors import ConfGraphError

RESERVED = frozenset({"event", "closed"})

_ARROWS = {
    "->": LinkKind.PROB_POS,
    "=>": LinkKind.LOGIC_POS,
    "-/>": LinkKind.PROB_NEG,
    "=/>": LinkKind.LOGIC_NEG,
}

_NAME_START = set("abcdefghijklmnopqrstuvwxyz")
_NAME_CHARS = _NAME_START | set("0123456789_-")


@dataclass(frozen=True)
class SourceSpan:
    line: int  # 1-based
    column: int  # 1-based
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    span: SourceSpan
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class _Token:
    kind: str  # NAME ARROW BANG LBRACE RBRACE COMMA DOT LPAREN RPAREN AMP QMARK BAD EOF
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def emit(kind: str, s: str, ln: int, cl: int) -> None:
        tokens.append(_Token(kind, s, SourceSpan(ln, cl, max(len(s), 1))))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in _NAME_START:
            j = i
            while j < n and text[j] in _NAME_CHARS:
                if text[j] == "-" and (j + 1 >= n or text[j + 1] not in _NAME_CHARS):
                    break  # the dash starts an arrow or is stray punctuation
                j += 1
            word = text[i:j]
            emit("NAME", word, start_line, start_col)
            col += j - i
            i = j
            continue
        matched = None
        for arrow in ("-/>", "=/>", "->", "=>"):
            if text.startswith(arrow, i):
                matched = arrow
                break
        if matched:
            emit("ARROW", matched, start_line, start_col)
            i += len(matched)
            col += len(matched)
            continue
        single = {
            "!": "BANG", "{": "LBRACE", "}": "RBRACE", ",": "COMMA", ".": "DOT",
            "(": "LPAREN", ")": "RPAREN", "&": "AMP", "?": "QMARK",
        }.get(ch)
        emit(single or "BAD", ch, start_line, start_col)
        i += 1
        col += 1
    tokens.append(_Token("EOF", "", SourceSpan(line, col, 1)))
    return tokens


@dataclass
class ParseResult:
    graph: Optional[InferenceGraph]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph is not None

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[ParseDiagnostic] = []

    @property
    def here(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.here
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, span: SourceSpan, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(span, "error", message))

    def expect(self, kind: str, what: str) -> Optional[_Token]:
        if self.here.kind == kind:
            return self.advance()
        self.error(self.here.span, f"expected {what}, found {self.here.text or 'end of input'!r}")
        return None

    def sync_to_dot(self) -> None:
        while self.here.kind not in ("DOT", "EOF"):
            self.advance()
        if self.here.kind == "DOT":
            self.advance()


def parse_graph(text: str) -> ParseResult:
    """Parse a graph file; all failures come back as spanned diagnostics."""
    p = _Parser(_tokenize(text))
    builder = GraphBuilder()
    while p.here.kind != "EOF":
        if p.here.kind == "NAME" and p.here.text == "event":
            _parse_event_decl(p, builder)
        elif p.here.kind in ("NAME", "BANG"):
            _parse_link(p, builder)
        else:
            p.error(p.here.span, f"expected a statement, found {p.here.text!r}")
            p.sync_to_dot()
    result = ParseResult(None, p.diagnostics)
    if not result.errors:
        graph = builder.graph()
        from .core import validate

        report = validate(graph)
        for f in report.findings:  # defensive: incremental checks should prevent these
            p.diagnostics.append(ParseDiagnostic(SourceSpan(1, 1, 1), "error", f.message))
        if not result.errors:
            result.graph = graph
    return result


def _parse_event_decl(p: _Parser, builder: GraphBuilder) -> None:
    p.advance()  # 'event'
    name_tok = p.expect("NAME", "an event name")
    if name_tok is None:
        return p.sync_to_dot()
    if name_tok.text in RESERVED:
        p.error(name_tok.span, f"{name_tok.text!r} is a reserved word")
        return p.sync_to_dot()
    if p.expect("LBRACE", "'{'") is None:
        return p.sync_to_dot()
    outcome_toks: list[_Token] = []
    while True:
        tok = p.expect("NAME", "an outcome name")
        if tok is None:
            return p.sync_to_dot()
        if tok.text in RESERVED:
            p.error(tok.span, f"{tok.text!r} is a reserved word")
            return p.sync_to_dot()
        outcome_toks.append(tok)
        if p.here.kind == "COMMA":
            p.advance()
            continue
        break
    if p.expect("RBRACE", "'}'") is None:
        return p.sync_to_dot()
    closed = False
    if p.here.kind == "NAME" and p.here.text == "closed":
        p.advance()
        closed = True
    if p.expect("DOT", "'.'") is None:
        return p.sync_to_dot()
    try:
        builder.add_event(name_tok.text, [t.text for t in outcome_toks], closed=closed)
    except ConfGraphError as e:
        p.error(name_tok.span, str(e))


def _parse_literal(p: _Parser, builder: GraphBuilder) -> Optional[Literal]:
    negated = False
    if p.here.kind == "BANG":
        p.advance()
        negated = True
    tok = p.expect("NAME", "a literal name")
    if tok is None:
        return None
    if tok.text in RESERVED:
        p.error(tok.span, f"{tok.text!r} is a reserved word")
        return None
    try:
        return builder.resolve_literal(tok.text, positive=not negated)
    except ConfGraphError as e:
        p.error(tok.span, str(e))
        return None


def _parse_link(p: _Parser, builder: GraphBuilder) -> None:
    source = _parse_literal(p, builder)
    if source is None:
        return p.sync_to_dot()
    if p.here.kind != "ARROW":
        p.error(p.here.span, f"expected a link arrow (-> => -/> =/>), found {p.here.text or 'end of input'!r}")
        return p.sync_to_dot()
    arrow = p.advance()
    target = _parse_literal(p, builder)
    if target is None:
        return p.sync_to_dot()
    if p.expect("DOT", "'.'") is None:
        return p.sync_to_dot()
    try:
        builder.add_link(source, target, _ARROWS[arrow.text])
    except ConfGraphError as e:
        p.error(arrow.span, str(e))


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


@dataclass
class QueryResult:
    subject: Optional[Proposition]
    evidence: Optional[Proposition]
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.subject is not None and self.evidence is not None


def parse_query(text: str, graph: InferenceGraph) -> QueryResult:
    """Parse ``conf(prop, prop)?`` against a graph's vocabulary."""
    p = _Parser(_tokenize(text))
    subject = evidence = None
    head = p.expect("NAME", "'conf'")
    if head is not None and head.text != "conf":
        p.error(head.span, f"queries start with 'conf', found {head.text!r}")
        head = None
    if head is not None and p.expect("LPAREN", "'('") is not None:
        subject = _parse_prop(p, graph)
        if subject is not None and p.expect("COMMA", "','") is not None:
            evidence = _parse_prop(p, graph)
            if evidence is not None and p.expect("RPAREN", "')'") is not None:
                if p.here.kind == "QMARK":
                    p.advance()
                if p.here.kind != "EOF":
                    p.error(p.here.span, f"unexpected trailing {p.here.text!r}")
    if subject is not None and evidence is not None and subject.events & evidence.events:
        shared = sorted(subject.events & evidence.events)[0]
        p.error(SourceSpan(1, 1, max(len(text), 1)), f"subject and evidence both mention event {shared!r}")
    if p.diagnostics:
        return QueryResult(None, None, p.diagnostics)
    return QueryResult(subject, evidence, p.diagnostics)


def _parse_prop(p: _Parser, graph: InferenceGraph) -> Optional[Proposition]:
    lits: list[Literal] = []
    while True:
        negated = False
        if p.here.kind == "BANG":
            p.advance()
            negated = True
        tok = p.expect("NAME", "a literal name")
        if tok is None:
            return None
        try:
            lits.append(graph.literal(tok.text, positive=not negated))
        except ConfGraphError as e:
            p.error(tok.span, str(e))
            return None
        if p.here.kind == "AMP":
            p.advance()
            continue
        break
    try:
        return Proposition.of(*lits)
    except ValueError as e:
        p.error(p.here.span, str(e))
        return None


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _needs_declaration(g: InferenceGraph, name: str, linked: set[str]) -> bool:
    ev = g.event(name)
    if ev.is_binary and ev.outcomes == (ev.name, "!" + ev.name):
        return name not in linked
    return True


def serialize(g: InferenceGraph) -> str:
    """Deterministic text form; ``parse_graph(serialize(g))`` reconstructs g.

    Raises ValueError for graphs that use literals the language cannot spell
    (the synthetic catch-all outcome).
    """
    linked = {l.source.event for l in g.links} | {l.target.event for l in g.links}
    lines: list[str] = []
    for ev in sorted(g.events, key=lambda e: e.name):
        if not _needs_declaration(g, ev.name, linked):
            continue
        if ev.is_binary and ev.outcomes[1] == "!" + ev.outcomes[0]:
            lines.append(f"event {ev.name} {{ {ev.outcomes[0]} }}.")
        elif ev.closed:
            lines.append(f"event {ev.name} {{ {', '.join(ev.outcomes)} }} closed.")
        else:
            declared = ev.outcomes[:-1]  # drop the synthetic catch-all
            lines.append(f"event {ev.name} {{ {', '.join(declared)} }}.")
    for link in sorted(g.links, key=lambda l: l.sort_key()):
        for lit in (link.source, link.target):
            ev = g.event(lit.event)
            if lit.outcome == SYNTHETIC_OTHER and lit.outcome in ev.synthetic_outcomes():
                raise ValueError(
                    f"link {link} references the synthetic outcome of {ev.name!r}; "
                    "not expressible in the graph language"
                )
        lines.append(f"{g.canonical(link.source)} {link.kind.value} {g.canonical(link.target)}.")
    return "\n".join(lines) + ("\n" if lines else "")
