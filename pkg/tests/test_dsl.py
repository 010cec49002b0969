import random

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from confgraph import GraphBuilder, LinkKind, Literal, parse_graph, parse_query, serialize

from conftest import EXAMPLE_NAMES, example_text, load_example


class TestParseGraph:
    def test_birds_core(self):
        r = parse_graph("bird -> fly.\nemu => bird.\nemu -/> fly.\n")
        assert r.ok
        assert len(r.graph.links) == 3
        kinds = {str(l): l.kind for l in r.graph.links}
        assert kinds["bird -> fly"] is LinkKind.PROB_POS
        assert kinds["emu => bird"] is LinkKind.LOGIC_POS
        assert kinds["emu -/> fly"] is LinkKind.PROB_NEG

    def test_nixon_fragment(self):
        r = parse_graph("event stance { hawk, dove }.\nquaker -> dove.\nrepublican -> hawk.\n")
        assert r.ok
        stance = r.graph.event("stance")
        assert stance.outcomes == ("hawk", "dove", "other")

    def test_closed_event(self):
        r = parse_graph("event coin { heads, tails } closed.\nheads -> win.\n")
        assert r.ok
        assert r.graph.event("coin").outcomes == ("heads", "tails")

    def test_unknown_arrow_diagnostic_position(self):
        r = parse_graph("bird ~> fly.")
        assert not r.ok
        d = r.errors[0]
        assert (d.span.line, d.span.column) == (1, 6)

    def test_negated_literals(self):
        r = parse_graph("!fly -> grounded.\n")
        assert r.ok
        (link,) = r.graph.links
        assert link.source == Literal("fly", "!fly", True)

    def test_negative_logical_link(self):
        r = parse_graph("quaker =/> hawk.\nevent x { y }.")
        assert r.ok

    def test_names_with_dashes(self):
        r = parse_graph("w-flu -> sneeze.\no-flu -/> sneeze.")
        assert r.ok
        assert r.graph.has_event("w-flu") and r.graph.has_event("o-flu")

    def test_comments_and_crlf(self):
        r = parse_graph("# a comment\r\nbird -> fly. # trailing\r\n")
        assert r.ok and len(r.graph.links) == 1

    def test_multi_outcome_bare_event_name_rejected(self):
        r = parse_graph("event stance { hawk, dove }.\nstance -> war.\n")
        assert not r.ok
        assert "outcome" in r.errors[0].message

    def test_duplicate_event_diagnostic(self):
        r = parse_graph("event s { a, b }.\nevent s { c, d }.\n")
        assert not r.ok

    def test_cycle_diagnostic_spans_arrow(self):
        r = parse_graph("a -> b.\nb -> c.\nc -> a.\n")
        assert not r.ok
        d = r.errors[0]
        assert d.span.line == 3 and "cycle" in d.message

    def test_reserved_words(self):
        assert not parse_graph("event -> fly.").ok
        assert not parse_graph("closed -> fly.").ok

    def test_recovery_continues_after_error(self):
        r = parse_graph("bird ~> fly.\nemu => bird.\n")
        assert not r.ok
        assert len(r.errors) == 1  # the second statement parsed fine

    def test_multiple_errors_reported(self):
        r = parse_graph("bird ~> fly.\nemu ~> bird.\n")
        assert len(r.errors) == 2

    def test_declaration_must_precede_use(self):
        r = parse_graph("quaker -> dove.\nevent stance { hawk, dove }.\n")
        assert not r.ok  # dove was auto-declared binary, then stance collides

    def test_empty_input(self):
        r = parse_graph("")
        assert r.ok and len(r.graph.events) == 0


class TestParseQuery:
    def test_simple(self, birds):
        q = parse_query("conf(fly, bird)?", birds)
        assert q.ok and str(q.subject) == "fly" and str(q.evidence) == "bird"

    def test_negation_and_conjunction(self, elephants):
        q = parse_query("conf(!gray, royal & african)?", elephants)
        assert q.ok
        assert str(q.subject) == "!gray"
        assert str(q.evidence) == "african & royal"

    def test_multi_outcome_negative_literal(self, nixon):
        q = parse_query("conf(!hawk, quaker)?", nixon)
        assert q.ok and q.subject.single == Literal("stance", "hawk", False)

    def test_overlapping_events_rejected(self, birds):
        q = parse_query("conf(fly, fly)?", birds)
        assert not q.ok
        assert any("mention" in d.message or "share" in d.message for d in q.diagnostics)

    def test_unknown_name_rejected(self, birds):
        q = parse_query("conf(penguin, bird)?", birds)
        assert not q.ok

    def test_question_mark_optional(self, birds):
        assert parse_query("conf(fly, bird)", birds).ok

    def test_malformed(self, birds):
        for text in ["", "conf fly bird", "conf(fly bird)?", "conf(fly, bird)? extra", "prob(fly, bird)?"]:
            assert not parse_query(text, birds).ok, text


class TestSerialize:
    def test_empty_graph(self):
        assert serialize(GraphBuilder().build()) == ""

    def test_roundtrip_examples(self):
        for name in EXAMPLE_NAMES:
            g = load_example(name)
            text = serialize(g)
            again = parse_graph(text)
            assert again.ok, (name, again.diagnostics)
            assert again.graph == g, name
            assert serialize(again.graph) == text

    def test_deterministic_and_lf_only(self, birds):
        text = serialize(birds)
        assert text == serialize(birds)
        assert "\r" not in text and text.endswith("\n")

    def test_declaration_emitted_before_links(self, nixon):
        lines = serialize(nixon).splitlines()
        assert lines[0].startswith("event stance")

    def test_isolated_binary_event_survives(self):
        b = GraphBuilder()
        b.add_event("lonely")
        g = b.build()
        text = serialize(g)
        assert "event lonely { lonely }." in text
        assert parse_graph(text).graph == g

    def test_event_with_renamed_outcome_survives(self):
        b = GraphBuilder()
        b.add_event("weather", ["rain"])
        b.add_event("picnic")
        b.add_link(Literal("weather", "rain"), Literal("picnic", "picnic"), LinkKind.PROB_NEG)
        g = b.build()
        assert parse_graph(serialize(g)).graph == g

    def test_closed_two_outcome_event_survives(self):
        b = GraphBuilder()
        b.add_event("coin", ["heads", "tails"], closed=True)
        b.add_event("win")
        b.add_link(Literal("coin", "heads"), Literal("win", "win"), LinkKind.PROB_POS)
        g = b.build()
        assert parse_graph(serialize(g)).graph == g

    def test_synthetic_outcome_not_expressible(self):
        b = GraphBuilder()
        b.add_event("stance", ["hawk", "dove"])
        b.add_event("odd")
        b.add_link(Literal("stance", "other"), Literal("odd", "odd"), LinkKind.PROB_POS)
        g = b.build()
        with pytest.raises(ValueError):
            serialize(g)


from conftest import random_valid_graph


def test_roundtrip_random_graphs():
    rng = random.Random(20240810)
    for _ in range(100):
        g = random_valid_graph(rng)
        text = serialize(g)
        again = parse_graph(text)
        assert again.ok, (text, again.diagnostics)
        assert again.graph == g, text


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=80))
@example("event { } .")
@example("!!a -> b.")
@example("a ->")
@example("event e { a, } .")
@example("a => a.")
@example("\x00\x7f")
def test_parser_total_on_arbitrary_text(text):
    r = parse_graph(text)
    if not r.ok:
        assert r.errors
        for d in r.diagnostics:
            assert d.span.line >= 1 and d.span.column >= 1 and d.span.length >= 1


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=40))
def test_query_parser_total(text):
    g = load_example("birds")
    q = parse_query(text, g)
    if not q.ok:
        assert q.diagnostics
