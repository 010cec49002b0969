import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confgraph import (
    ContradictoryLogicalLinks,
    CycleIntroduced,
    DuplicateEvent,
    DuplicateLink,
    DuplicateOutcome,
    GraphBuilder,
    InferenceGraph,
    Link,
    LinkKind,
    Literal,
    Proposition,
    SelfLink,
    add_link,
    entails,
    possible,
    sample_consistent,
    validate,
)
from confgraph.core import propagate, topological_order

from conftest import graph_from_links


class TestEvents:
    def test_bare_name_declares_binary_with_complement(self):
        b = GraphBuilder()
        ev = b.add_event("bird")
        assert ev.outcomes == ("bird", "!bird")
        assert ev.is_binary and ev.closed

    def test_open_multi_outcome_gains_catchall(self):
        b = GraphBuilder()
        ev = b.add_event("stance", ["hawk", "dove"], closed=False)
        assert ev.outcomes == ("hawk", "dove", "other")
        assert not ev.closed

    def test_closed_multi_outcome_kept_verbatim(self):
        b = GraphBuilder()
        ev = b.add_event("coin", ["heads", "tails"], closed=True)
        assert ev.outcomes == ("heads", "tails")
        assert ev.is_binary

    def test_duplicate_outcome_rejected(self):
        with pytest.raises(DuplicateOutcome):
            GraphBuilder().add_event("stance", ["hawk", "hawk"])

    def test_duplicate_event_rejected(self):
        b = GraphBuilder()
        b.add_event("bird")
        with pytest.raises(DuplicateEvent):
            b.add_event("bird")

    def test_cross_event_name_collision_rejected(self):
        b = GraphBuilder()
        b.add_event("stance", ["hawk", "dove"])
        with pytest.raises(DuplicateOutcome):
            b.add_event("hawk")

    def test_user_other_outcome_on_open_event_rejected(self):
        with pytest.raises(DuplicateOutcome):
            GraphBuilder().add_event("s", ["hawk", "other"], closed=False)


class TestLiterals:
    def test_binary_negation_canonicalizes_to_complement(self):
        g = graph_from_links("bird -> fly")
        assert g.canonical(Literal("bird", "bird", False)) == Literal("bird", "!bird", True)
        assert g.negate(Literal("bird", "!bird", True)) == Literal("bird", "bird", True)

    def test_multi_outcome_negation_keeps_polarity(self):
        b = GraphBuilder()
        b.add_event("stance", ["hawk", "dove"])
        g = b.graph()
        lit = g.literal("dove", positive=False)
        assert lit == Literal("stance", "dove", False)
        assert g.negate(lit) == Literal("stance", "dove", True)

    def test_str_forms(self):
        assert str(Literal("stance", "dove", False)) == "!dove"
        assert str(Literal("bird", "!bird", True)) == "!bird"


class TestPropositions:
    def test_canonical_ordering_and_equality(self):
        a = Literal("x", "x"), Literal("y", "y")
        p1 = Proposition.of(*a)
        p2 = Proposition.of(*reversed(a))
        assert p1 == p2 and hash(p1) == hash(p2)

    def test_same_event_conjuncts_rejected(self):
        with pytest.raises(ValueError):
            Proposition.of(Literal("x", "x"), Literal("x", "!x"))

    @given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=4, unique=True))
    def test_order_insensitive(self, names):
        lits = [Literal(n, n) for n in names]
        import random as _r

        shuffled = lits[:]
        _r.Random(0).shuffle(shuffled)
        assert Proposition.of(*lits) == Proposition.of(*shuffled)


class TestLinks:
    def test_self_link_rejected(self):
        b = GraphBuilder()
        b.add_event("x")
        with pytest.raises(SelfLink):
            b.add_link(Literal("x", "x"), Literal("x", "!x"), LinkKind.PROB_POS)

    def test_duplicate_link_rejected_even_with_other_kind(self):
        b = GraphBuilder()
        b.add_event("a")
        b.add_event("b")
        b.add_link(Literal("a", "a"), Literal("b", "b"), LinkKind.PROB_POS)
        with pytest.raises(DuplicateLink):
            b.add_link(Literal("a", "a"), Literal("b", "b"), LinkKind.LOGIC_POS)

    def test_cycle_rejected(self):
        b = GraphBuilder()
        for n in "abc":
            b.add_event(n)
        b.add_link(Literal("a", "a"), Literal("b", "b"), LinkKind.PROB_POS)
        b.add_link(Literal("b", "b"), Literal("c", "c"), LinkKind.PROB_POS)
        with pytest.raises(CycleIntroduced):
            b.add_link(Literal("c", "c"), Literal("a", "a"), LinkKind.PROB_POS)

    def test_contradictory_logical_links_rejected(self):
        # emu => bird plus emu => !bird forces p(emu) = 0
        b = GraphBuilder()
        b.add_event("emu")
        b.add_event("bird")
        b.add_link(Literal("emu", "emu"), Literal("bird", "bird"), LinkKind.LOGIC_POS)
        with pytest.raises(ContradictoryLogicalLinks):
            b.add_link(Literal("emu", "emu"), Literal("bird", "bird", False), LinkKind.LOGIC_POS)

    def test_same_pair_opposite_kinds_already_duplicates(self):
        b = GraphBuilder()
        b.add_event("emu")
        b.add_event("bird")
        b.add_link(Literal("emu", "emu"), Literal("bird", "bird"), LinkKind.LOGIC_POS)
        with pytest.raises((DuplicateLink, ContradictoryLogicalLinks)):
            b.add_link(Literal("emu", "emu"), Literal("bird", "bird"), LinkKind.LOGIC_NEG)

    def test_contradiction_through_chain_rejected(self):
        # a => b, b => c, a =/> c forces p(a) = 0
        b = GraphBuilder()
        for n in "abc":
            b.add_event(n)
        b.add_link(Literal("a", "a"), Literal("b", "b"), LinkKind.LOGIC_POS)
        b.add_link(Literal("b", "b"), Literal("c", "c"), LinkKind.LOGIC_POS)
        with pytest.raises(ContradictoryLogicalLinks):
            b.add_link(Literal("a", "a"), Literal("c", "c"), LinkKind.LOGIC_NEG)

    def test_functional_add_link_leaves_input_untouched(self, birds):
        before = len(birds.links)
        g2 = add_link(birds, birds.literal("feathers"), birds.literal("airborn"), LinkKind.PROB_POS)
        assert len(birds.links) == before
        assert len(g2.links) == before + 1


class TestValidate:
    def test_examples_are_valid(self, birds, nixon, elephants, diagnosis):
        for g in (birds, nixon, elephants, diagnosis):
            assert validate(g).is_valid

    def test_cycle_finding_on_raw_graph(self):
        events = [GraphBuilder().add_event(n) for n in "abc"]
        mk = lambda s, t: Link(Literal(s, s), Literal(t, t), LinkKind.LOGIC_POS)
        g = InferenceGraph(events, [mk("a", "b"), mk("b", "c"), mk("c", "a")])
        report = validate(g)
        assert any(f.code == "cycle" for f in report.findings)

    def test_contradiction_finding_on_raw_graph(self):
        events = [GraphBuilder().add_event(n) for n in "ab"]
        links = [
            Link(Literal("a", "a"), Literal("b", "b"), LinkKind.LOGIC_POS),
            Link(Literal("a", "a"), Literal("b", "b"), LinkKind.LOGIC_NEG),
        ]
        report = validate(InferenceGraph(events, links))
        assert any(f.code in ("contradiction", "duplicate-link") for f in report.findings)

    def test_dangling_literal_reported(self):
        events = [GraphBuilder().add_event("a")]
        g = InferenceGraph(events, [Link(Literal("a", "a"), Literal("ghost", "ghost"), LinkKind.PROB_POS)])
        assert any(f.code == "dangling-literal" for f in validate(g).findings)


class TestEntailment:
    def test_reflexive(self, birds):
        assert entails(birds, birds.literal("emu"), birds.literal("emu"))

    def test_via_logical_link(self, birds):
        assert entails(birds, birds.literal("emu"), birds.literal("bird"))
        assert not entails(birds, birds.literal("bird"), birds.literal("emu"))

    def test_transitive(self, birds):
        assert entails(birds, birds.literal("flemu"), birds.literal("bird"))

    def test_contrapositive(self, birds):
        assert entails(birds, birds.literal("bird", False), birds.literal("emu", False))

    def test_probabilistic_links_do_not_entail(self, birds):
        assert not entails(birds, birds.literal("bird"), birds.literal("fly"))

    def test_propositional_subsumption(self, birds):
        both = Proposition.of(birds.literal("emu"), birds.literal("fly"))
        assert entails(birds, both, birds.literal("fly"))

    def test_sibling_exclusion(self, nixon):
        assert entails(nixon, nixon.literal("dove"), nixon.literal("hawk", False))

    def test_no_mutual_entailment_between_distinct_literals(self, birds):
        lits = birds.all_literals()
        for a in lits:
            for b in lits:
                if a != b and entails(birds, a, b) and entails(birds, b, a):
                    pytest.fail(f"{a} and {b} entail each other")

    def test_contrapositive_numerically(self, birds):
        # p(!emu | !bird) = 1 in every consistent distribution
        nb = Proposition.of(birds.literal("bird", False))
        ne = Proposition.of(birds.literal("emu", False))
        for seed in range(200):
            d = sample_consistent(birds, seed)
            assert d.cond(ne, nb) == 1.0


class TestPropagation:
    def test_possible_conjunctions(self, birds):
        assert possible(birds, Proposition.of(birds.literal("bird"), birds.literal("emu")))
        assert not possible(birds, Proposition.of(birds.literal("emu"), birds.literal("bird", False)))

    def test_closed_event_last_outcome_forced(self):
        b = GraphBuilder()
        b.add_event("s", ["p", "q", "r"], closed=True)
        b.add_event("z")
        b.add_link(Literal("s", "p"), Literal("z", "z"), LinkKind.LOGIC_POS)
        g = b.graph()
        # excluding q and r forces p, which forces z
        res = propagate(g, [Literal("s", "q", False), Literal("s", "r", False)])
        assert res.ok and res.pinned["s"] == "p" and res.pinned["z"] == "z"

    def test_open_event_catchall_counts(self):
        b = GraphBuilder()
        b.add_event("s", ["p", "q"], closed=False)
        g = b.graph()
        res = propagate(g, [Literal("s", "p", False), Literal("s", "q", False)])
        assert res.ok and res.pinned["s"] == "other"


class TestTopology:
    def test_topological_order_is_deterministic(self, birds):
        assert topological_order(birds) == topological_order(birds)

    def test_parents_children(self, birds):
        assert birds.parents_of("fly") == {"bird", "emu", "flemu"}
        assert birds.children_of("bird") == {"fly", "feathers"}

    def test_graph_equality_ignores_order(self, birds):
        g2 = InferenceGraph(tuple(reversed(birds.events)), tuple(reversed(birds.links)))
        assert g2 == birds and hash(g2) == hash(birds)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_builder_never_creates_cyclic_graphs(data):
    names = [f"e{i}" for i in range(data.draw(st.integers(2, 6)))]
    b = GraphBuilder()
    for n in names:
        b.add_event(n)
    for _ in range(data.draw(st.integers(0, 10))):
        s = data.draw(st.sampled_from(names))
        t = data.draw(st.sampled_from(names))
        kind = data.draw(st.sampled_from(list(LinkKind)))
        try:
            b.add_link(Literal(s, s), Literal(t, t), kind)
        except (SelfLink, CycleIntroduced, DuplicateLink, ContradictoryLogicalLinks):
            pass
    g = b.build()
    assert validate(g).is_valid
    topological_order(g)  # raises on cycles
