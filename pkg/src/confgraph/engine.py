"""Derivation engine: fixpoint closure of the confirmation-rule catalog.

Each link contributes an axiom statement; the catalog below then derives new
statements, every application guarded by entailment or conditional-
independence side conditions checked against the graph topology:

=================  =========================================================
Symmetry     4.2   conf(a,b) yields conf(b,a)
Negation     4.3   conf(a,b) yields conf(!a,!b)           (binary events)
Specificity  4.4   conf(a,c), conf(b,d), c/d outcomes of one event, a |= b
                   yields conf(c, a & b)
Subclass     4.5   b |= a and a |/= b yields conf(b,a)
Resolution   4.6   conf(a,c), conf(b,c), a _||_ b | c yields conf(a,b)
Dilution     4.7   conf(a,b), conf(b,c), a _||_ c | b yields the ordering
                   p(a|c) < p(a|b); the statement conf(a,c) itself follows
                   by Resolution on the same premises
Irrelevance  4.8   conf(a,c), a _||_ b | c yields conf(a, b & c)
Relevance    4.9   conf(a,c), conf(b,c), a _||_ b | c yields conf(a & b, c)
ExceptShield 4.10  conf(!a,b), conf(a,c), b => c yields conf(a, !b & c)
LogicalInh.  4.11  r,e sole parents of g, r |= e, x |= e, r _||_ x,
                   conf(g,e), conf(!g,r) yields conf(g,x)
=================  =========================================================

Every proof node records whether its side conditions certify soundness in
full ("exact"). Independence side conditions discharged through event-level
d-separation are exact only when the conditioning literals pin their events;
a pivot on a multi-outcome event leaves the negated branch a mixture, and the
conclusion — though derived, matching the catalog — can fail in some
consistent distributions. The oracle's hard guarantees apply to exact proofs;
heuristic ones are flagged all the way into rendered output.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional, Sequence

from . import independence
from .core import (
    InferenceGraph,
    Link,
    Literal,
    Proposition,
    PropositionLike,
    as_proposition,
    entails,
    possible,
    propagate,
)
from .errors import MalformedQuery, NoProof, UnknownEvent, UnknownOutcome

BASE_LINK = "BaseLink"
SYMMETRY = "Symmetry"
NEGATION = "Negation"
SPECIFICITY = "Specificity"
SUBCLASS = "Subclass"
RESOLUTION = "Resolution"
DILUTION = "Dilution"
IRRELEVANCE = "Irrelevance"
RELEVANCE = "Relevance"
EXCEPTION_SHIELD = "ExceptionShield"
LOGICAL_INHERIT = "LogicalInherit"

LEMMA_IDS = {
    SYMMETRY: "4.2",
    NEGATION: "4.3",
    SPECIFICITY: "4.4",
    SUBCLASS: "4.5",
    RESOLUTION: "4.6",
    DILUTION: "4.7",
    IRRELEVANCE: "4.8",
    RELEVANCE: "4.9",
    EXCEPTION_SHIELD: "4.10",
    LOGICAL_INHERIT: "4.11",
}


@dataclass(frozen=True)
class SideCondition:
    kind: str  # "link" | "ci" | "entails" | "not-entails" | "structure"
    text: str
    exact: bool = True

    def __str__(self) -> str:
        return self.text if self.exact else self.text + " [heuristic]"


@dataclass(frozen=True)
class ProofTree:
    rule: str
    subject: Proposition
    evidence: Proposition
    premises: tuple["ProofTree", ...] = ()
    side_conditions: tuple[SideCondition, ...] = ()

    @property
    def lemma(self) -> Optional[str]:
        return LEMMA_IDS.get(self.rule)

    @property
    def exact(self) -> bool:
        return all(sc.exact for sc in self.side_conditions) and all(
            p.exact for p in self.premises
        )

    def render(self, depth: int = 0) -> str:
        pad = "  " * depth
        head = self.rule if self.lemma is None else f"{self.rule}[Lemma {self.lemma}]"
        line = f"{pad}{head}: conf({self.subject}, {self.evidence})"
        if self.side_conditions:
            line += " ⊣ " + "; ".join(str(sc) for sc in self.side_conditions)
        return "\n".join([line] + [p.render(depth + 1) for p in self.premises])

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "lemma": self.lemma,
            "statement": f"conf({self.subject}, {self.evidence})",
            "premises": [p.to_json() for p in self.premises],
            "side_conditions": [str(sc) for sc in self.side_conditions],
        }

    def rules_used(self) -> set[str]:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules_used()
        return out


class ConfStatement:
    """conf(subject, evidence): evidence strictly raises the subject's probability.

    Identity is the (subject, evidence) pair; the proof is how this closure
    happened to derive it first.
    """

    __slots__ = ("subject", "evidence", "proof")

    def __init__(self, subject: Proposition, evidence: Proposition, proof: ProofTree):
        self.subject = subject
        self.evidence = evidence
        self.proof = proof

    @property
    def key(self) -> tuple[Proposition, Proposition]:
        return (self.subject, self.evidence)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfStatement) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return f"conf({self.subject}, {self.evidence})"

    def __repr__(self) -> str:
        return f"ConfStatement({self})"


@dataclass(frozen=True)
class StrengthFact:
    """Strict ordering of two evidences for one subject: p(s|stronger) > p(s|weaker).

    ``exact`` reflects the side conditions of the derivation that produced the
    fact first, so it stays out of equality.
    """

    subject: Proposition
    stronger: Proposition
    weaker: Proposition
    exact: bool = field(default=True, compare=False)

    def __str__(self) -> str:
        return f"p({self.subject} | {self.stronger}) > p({self.subject} | {self.weaker})"


class VerdictKind(Enum):
    CONFIRMED = "confirmed"
    DISCONFIRMED = "disconfirmed"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    proof: Optional[ProofTree] = None

    @property
    def exit_code(self) -> int:
        return {VerdictKind.CONFIRMED: 0, VerdictKind.UNKNOWN: 1, VerdictKind.DISCONFIRMED: 2}[self.kind]


@dataclass
class EngineConfig:
    max_arity: int = 2
    enable_relevance: bool = True
    worklist_seed: Optional[int] = None


def explain(verdict: Verdict) -> str:
    if verdict.proof is None:
        raise NoProof("no proof to render for an Unknown verdict")
    return verdict.proof.render()


# ---------------------------------------------------------------------------
# Closure computation
# ---------------------------------------------------------------------------


def base_statements(g: InferenceGraph) -> list[ConfStatement]:
    """One axiom statement per link: a -> b gives conf(b,a), a -/> b gives conf(!b,a)."""
    out = []
    for link in sorted(g.links, key=Link.sort_key):
        src = g.canonical(link.source)
        tgt = g.canonical(link.target)
        if link.kind.is_negative:
            tgt = g.negate(tgt)
        subject = Proposition.of(tgt)
        evidence = Proposition.of(src)
        proof = ProofTree(
            BASE_LINK, subject, evidence,
            side_conditions=(SideCondition("link", f"link {link}"),),
        )
        out.append(ConfStatement(subject, evidence, proof))
    return out


class Closure:
    """The least fixpoint of the rule catalog over one graph."""

    def __init__(self, graph: InferenceGraph, config: EngineConfig):
        self.graph = graph
        self.config = config
        self._stmts: dict[tuple[Proposition, Proposition], ConfStatement] = {}
        self._facts: dict[tuple[Proposition, Proposition, Proposition], StrengthFact] = {}

    @property
    def statements(self) -> tuple[ConfStatement, ...]:
        return tuple(self._stmts.values())

    @property
    def strength_facts(self) -> tuple[StrengthFact, ...]:
        return tuple(self._facts.values())

    def get(self, subject: PropositionLike, evidence: PropositionLike) -> Optional[ConfStatement]:
        return self._stmts.get((as_proposition(subject), as_proposition(evidence)))

    def __contains__(self, pair) -> bool:
        subject, evidence = pair
        return self.get(subject, evidence) is not None

    def statement_keys(self) -> frozenset[tuple[Proposition, Proposition]]:
        return frozenset(self._stmts)

    def fact_keys(self) -> frozenset[tuple[Proposition, Proposition, Proposition]]:
        return frozenset(self._facts)

    def query(self, subject: PropositionLike, evidence: PropositionLike) -> Verdict:
        subject, evidence = _canonical_query(self.graph, subject, evidence)
        hit = self.get(subject, evidence)
        if hit is not None:
            return Verdict(VerdictKind.CONFIRMED, hit.proof)
        if subject.is_single:
            neg = self.get(Proposition.of(self.graph.negate(subject.single)), evidence)
            if neg is not None:
                return Verdict(VerdictKind.DISCONFIRMED, neg.proof)
        return Verdict(VerdictKind.UNKNOWN)


def _canonical_query(
    g: InferenceGraph, subject: PropositionLike, evidence: PropositionLike
) -> tuple[Proposition, Proposition]:
    try:
        subject = Proposition.of(*(g.canonical(l) for l in as_proposition(subject)))
        evidence = Proposition.of(*(g.canonical(l) for l in as_proposition(evidence)))
    except (UnknownEvent, UnknownOutcome, ValueError) as e:
        raise MalformedQuery(str(e))
    if subject.events & evidence.events:
        shared = sorted(subject.events & evidence.events)[0]
        raise MalformedQuery(f"subject and evidence both mention event {shared!r}")
    return subject, evidence


class _CiResult:
    __slots__ = ("fires", "exact", "condition")

    def __init__(self, fires: bool, exact: bool, condition: Optional[SideCondition]):
        self.fires = fires
        self.exact = exact
        self.condition = condition


class _Engine:
    def __init__(self, g: InferenceGraph, config: EngineConfig):
        self.g = g
        self.cfg = config
        self.closure = Closure(g, config)
        self.literals = g.all_literals()
        self.by_evidence: dict[Proposition, list[ConfStatement]] = {}
        self.by_subject: dict[Proposition, list[ConfStatement]] = {}
        self.by_evidence_event: dict[str, list[ConfStatement]] = {}
        self.worklist: deque[ConfStatement] = deque()

    # -- helpers ----------------------------------------------------------

    def conjoin(self, *parts: PropositionLike) -> Optional[Proposition]:
        """Conjunction of the parts, or None if malformed, impossible, or too wide."""
        lits: list[Literal] = []
        for p in parts:
            lits.extend(as_proposition(p).literals)
        lits = sorted(set(lits))
        events = [l.event for l in lits]
        if len(set(events)) != len(events) or len(lits) > self.cfg.max_arity:
            return None
        prop = Proposition(tuple(lits))
        if not possible(self.g, prop):
            return None
        return prop

    def ci(self, a: Proposition, b: Proposition, given: Optional[Proposition]) -> _CiResult:
        """Independence side condition for rules that only condition on ``given``
        being true (Irrelevance): event-level d-separation with deterministic
        pinning; exact whenever the conditioning literals pin their events."""
        fires = independence.ci_for_literals(self.g, a, b, given)
        if not fires:
            return _CiResult(False, False, None)
        if given is None:
            text = f"{a} ⫫ {b} (d-sep, unconditional)"
            return _CiResult(True, True, SideCondition("ci", text, True))
        exact = self._pins_fully(given)
        text = f"{a} ⫫ {b} | {given} (d-sep)"
        return _CiResult(True, exact, SideCondition("ci", text, exact))

    def pivot_ci(self, a: Proposition, b: Proposition, pivot: Proposition) -> _CiResult:
        """Independence side condition for rules whose proofs condition on the
        pivot being true *and* false (Resolution, Dilution, Relevance).

        Fires on plain event-level d-separation given the pivot's events. The
        conclusion carries a full soundness guarantee only when both branches
        pin their events (a single literal on a binary event, plus whatever
        logical links force) and d-separation holds under each branch's
        conditioning set.
        """
        zs = pivot.events
        if a.events & b.events or a.events & zs or b.events & zs or not possible(self.g, pivot):
            return _CiResult(False, False, None)
        if not independence.d_separated(self.g, a.events, b.events, zs):
            return _CiResult(False, False, None)
        exact = False
        if pivot.is_single and self._pins_fully(pivot):
            neg = Proposition.of(self.g.negate(pivot.single))
            if self._pins_fully(neg):
                exact = self._branch_separated(a, b, pivot) and self._branch_separated(a, b, neg)
        text = f"{a} ⫫ {b} | {pivot} (d-sep)"
        return _CiResult(True, exact, SideCondition("ci", text, exact))

    def _branch_separated(self, a: Proposition, b: Proposition, branch: Proposition) -> bool:
        zs = independence.conditioning_events(self.g, branch)
        if a.events & zs or b.events & zs:
            return False
        return independence.d_separated(self.g, a.events, b.events, zs)

    def _pins_fully(self, prop: Proposition) -> bool:
        res = propagate(self.g, prop.literals)
        return res.ok and all(l.event in res.pinned for l in prop.literals)

    def entail_cond(self, a: PropositionLike, b: PropositionLike) -> SideCondition:
        return SideCondition("entails", f"{as_proposition(a)} ⊨ {as_proposition(b)}")

    # -- statement admission ------------------------------------------------

    def add(
        self,
        subject: Proposition,
        evidence: Proposition,
        rule: str,
        premises: Sequence[ConfStatement] = (),
        side_conditions: Sequence[SideCondition] = (),
    ) -> bool:
        if len(subject) > self.cfg.max_arity or len(evidence) > self.cfg.max_arity:
            return False
        if subject.events & evidence.events:
            return False
        if not propagate(self.g, subject.literals + evidence.literals).ok:
            return False
        key = (subject, evidence)
        if key in self.closure._stmts:
            return False
        proof = ProofTree(rule, subject, evidence, tuple(p.proof for p in premises), tuple(side_conditions))
        st = ConfStatement(subject, evidence, proof)
        self.closure._stmts[key] = st
        self.by_evidence.setdefault(evidence, []).append(st)
        self.by_subject.setdefault(subject, []).append(st)
        if evidence.is_single:
            self.by_evidence_event.setdefault(evidence.single.event, []).append(st)
        self.worklist.append(st)
        return True

    def add_fact(self, subject: Proposition, stronger: Proposition, weaker: Proposition, exact: bool) -> None:
        if stronger == weaker or subject.events & (stronger.events | weaker.events):
            return
        for ev in (stronger, weaker):
            if not propagate(self.g, subject.literals + ev.literals).ok:
                return
        key = (subject, stronger, weaker)
        if key not in self.closure._facts:
            self.closure._facts[key] = StrengthFact(subject, stronger, weaker, exact)

    # -- the rule catalog ---------------------------------------------------

    def rule_symmetry(self, st: ConfStatement) -> None:
        self.add(st.evidence, st.subject, SYMMETRY, [st])

    def rule_negation(self, st: ConfStatement) -> None:
        if not (st.subject.is_single and st.evidence.is_single):
            return
        a, b = st.subject.single, st.evidence.single
        if self.g.event(a.event).is_binary and self.g.event(b.event).is_binary:
            self.add(
                Proposition.of(self.g.negate(a)),
                Proposition.of(self.g.negate(b)),
                NEGATION,
                [st],
            )

    def rule_specificity(self, st: ConfStatement) -> None:
        if not st.evidence.is_single:
            partners: Iterable[ConfStatement] = ()
        else:
            partners = list(self.by_evidence_event.get(st.evidence.single.event, ()))
        for other in partners:
            for first, second in ((st, other), (other, st)):
                c, d = first.evidence.single, second.evidence.single
                if c == d:
                    continue
                a, b = first.subject, second.subject
                if a == b or not entails(self.g, a, b):
                    continue
                conj = self.conjoin(a, b)
                if conj is None or c.event in conj.events:
                    continue
                self.add(
                    Proposition.of(c),
                    conj,
                    SPECIFICITY,
                    [first, second],
                    [self.entail_cond(a, b),
                     SideCondition("structure", f"{c} and {d} are outcomes of event {c.event!r}")],
                )

    def rule_resolution(self, st: ConfStatement) -> None:
        for other in list(self.by_evidence.get(st.evidence, ())):
            for first, second in ((st, other), (other, st)):
                a, b = first.subject, second.subject
                if a == b or a.events & b.events:
                    continue
                res = self.pivot_ci(a, b, first.evidence)
                if res.fires:
                    self.add(a, b, RESOLUTION, [first, second], [res.condition])

    def rule_dilution(self, st: ConfStatement) -> None:
        # st as conf(a,b): partners conf(b,c); st as conf(b,c): partners conf(a,b)
        pairs = [(st, t) for t in self.by_subject.get(st.evidence, ())]
        pairs += [(t, st) for t in self.by_evidence.get(st.subject, ())]
        for first, second in pairs:
            a, b, c = first.subject, first.evidence, second.evidence
            if b != second.subject or a.events & c.events or a == c:
                continue
            res = self.pivot_ci(a, c, b)
            if res.fires:
                exact = res.exact and first.proof.exact and second.proof.exact
                self.add_fact(a, stronger=b, weaker=c, exact=exact)

    def rule_irrelevance(self, st: ConfStatement) -> None:
        a, c = st.subject, st.evidence
        for lit in self.literals:
            if lit.event in a.events or lit.event in c.events:
                continue
            b = Proposition.of(lit)
            conj = self.conjoin(c, b)
            if conj is None:
                continue
            res = self.ci(a, b, c)
            if res.fires:
                self.add(a, conj, IRRELEVANCE, [st], [res.condition])

    def rule_relevance(self, st: ConfStatement) -> None:
        if not self.cfg.enable_relevance:
            return
        for other in list(self.by_evidence.get(st.evidence, ())):
            for first, second in ((st, other), (other, st)):
                a, b = first.subject, second.subject
                if a == b:
                    continue
                conj = self.conjoin(a, b)
                if conj is None or conj.events & st.evidence.events:
                    continue
                res = self.pivot_ci(a, b, st.evidence)
                if res.fires:
                    self.add(conj, st.evidence, RELEVANCE, [first, second], [res.condition])

    def rule_exception_shield(self, st: ConfStatement) -> None:
        if not st.subject.is_single:
            return
        neg_subject = Proposition.of(self.g.negate(st.subject.single))
        for other in self.by_subject.get(neg_subject, ()):
            for negative, positive in ((st, other), (other, st)):
                # negative: conf(!a, b) with b single; positive: conf(a, c); b => c
                if not negative.evidence.is_single:
                    continue
                a = positive.subject
                b = negative.evidence.single
                c = positive.evidence
                if not (entails(self.g, b, c) and not entails(self.g, c, b)):
                    continue
                conj = self.conjoin(Proposition.of(self.g.negate(b)), c)
                if conj is None or a.events & conj.events:
                    continue
                self.add(
                    a, conj, EXCEPTION_SHIELD, [negative, positive],
                    [self.entail_cond(b, c)],
                )

    def rule_logical_inherit(self, st: ConfStatement) -> None:
        if not (st.subject.is_single and st.evidence.is_single):
            return
        g = self.g
        # roles: st = conf(gnode, e) needs partner conf(!gnode, r); and vice versa
        for flipped in (False, True):
            head = st.subject.single
            gnode = g.negate(head) if flipped else head
            parents = g.parents_of(gnode.event)
            if len(parents) != 2 or st.evidence.single.event not in parents:
                continue
            partner_subject = Proposition.of(g.negate(gnode) if not flipped else gnode)
            for other in self.by_subject.get(partner_subject, ()):
                if not other.evidence.is_single:
                    continue
                if flipped:
                    pos, neg = other, st
                else:
                    pos, neg = st, other
                e = pos.evidence.single
                r = neg.evidence.single
                if {e.event, r.event} != set(parents) or e.event == r.event:
                    continue
                if not entails(g, r, e):
                    continue
                self._logical_inherit_conclusions(pos, neg, gnode, e, r)

    def _logical_inherit_conclusions(self, pos, neg, gnode: Literal, e: Literal, r: Literal) -> None:
        g = self.g
        used = {gnode.event, e.event, r.event}
        structure = SideCondition(
            "structure", f"direct predecessors of {gnode.event!r} are exactly {{{e.event}, {r.event}}}"
        )
        for a in self.literals:
            if a.event in used:
                continue
            if not entails(g, a, e):
                continue
            if not independence.d_separated(g, {r.event}, {a.event}, frozenset()):
                continue
            exact = all(
                g.event(x).is_binary for x in (gnode.event, e.event, r.event, a.event)
            )
            self.add(
                Proposition.of(gnode),
                Proposition.of(a),
                LOGICAL_INHERIT,
                [pos, neg],
                [
                    structure,
                    self.entail_cond(r, e),
                    self.entail_cond(a, e),
                    SideCondition("ci", f"{r} ⫫ {a} (d-sep, unconditional)", exact),
                ],
            )

    # -- seeding ------------------------------------------------------------

    def propositions(self) -> list[Proposition]:
        """Every possible proposition over addressable literals, up to max arity."""
        props: list[Proposition] = []
        for size in range(1, self.cfg.max_arity + 1):
            for combo in combinations(self.literals, size):
                events = [l.event for l in combo]
                if len(set(events)) != len(events):
                    continue
                prop = Proposition(tuple(sorted(combo)))
                if possible(self.g, prop):
                    props.append(prop)
        return props

    def seed_subclass(self) -> list[tuple]:
        """Statements from strict entailment: b |= a, a |/= b gives conf(b, a)."""
        out = []
        props = self.propositions()
        for b in props:
            for a in props:
                if a == b or a.events & b.events:
                    continue
                if entails(self.g, b, a) and not entails(self.g, a, b):
                    out.append(
                        (
                            b,
                            a,
                            SUBCLASS,
                            [],
                            [
                                self.entail_cond(b, a),
                                SideCondition("not-entails", f"{a} ⊭ {b}"),
                            ],
                        )
                    )
        return out

    def run(self) -> Closure:
        seeds: list[tuple] = []
        for st in base_statements(self.g):
            seeds.append((st.subject, st.evidence, BASE_LINK, [], list(st.proof.side_conditions)))
        seeds.extend(self.seed_subclass())
        if self.cfg.worklist_seed is not None:
            random.Random(self.cfg.worklist_seed).shuffle(seeds)
        for subject, evidence, rule, premises, sides in seeds:
            self.add(subject, evidence, rule, premises, sides)
        rules = [
            self.rule_symmetry,
            self.rule_negation,
            self.rule_specificity,
            self.rule_resolution,
            self.rule_dilution,
            self.rule_irrelevance,
            self.rule_relevance,
            self.rule_exception_shield,
            self.rule_logical_inherit,
        ]
        while self.worklist:
            st = self.worklist.popleft()
            for rule in rules:
                rule(st)
        return self.closure


def close(g: InferenceGraph, config: Optional[EngineConfig] = None, *, max_arity: Optional[int] = None) -> Closure:
    """Least fixpoint of the rule catalog; independent of worklist order."""
    cfg = config or EngineConfig()
    if max_arity is not None:
        cfg = EngineConfig(max_arity, cfg.enable_relevance, cfg.worklist_seed)
    if cfg.max_arity < 1:
        raise ValueError("max_arity must be at least 1")
    return _Engine(g, cfg).run()


def query(
    g: InferenceGraph,
    subject: PropositionLike,
    evidence: PropositionLike,
    config: Optional[EngineConfig] = None,
    closure: Optional[Closure] = None,
) -> Verdict:
    """Three-valued answer: Confirmed, Disconfirmed (the negated subject is
    confirmed; single-literal subjects only), or Unknown."""
    closure = closure or close(g, config)
    return closure.query(subject, evidence)
