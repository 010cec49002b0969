"""Shared fixtures and independent test-side oracles.

The brute-force d-separation check and the factorized-table CI check here are
deliberately written from scratch (path enumeration, explicit CPT products)
so the package's own algorithms are validated against something that shares
no code with them.
"""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from importlib import resources

import numpy as np
import pytest

from confgraph import ConfGraphError, GraphBuilder, LinkKind, Literal, parse_graph


def load_example(name: str):
    text = (resources.files("confgraph") / "examples" / f"{name}.igr").read_text()
    result = parse_graph(text)
    assert result.ok, result.diagnostics
    return result.graph


def example_text(name: str) -> str:
    return (resources.files("confgraph") / "examples" / f"{name}.igr").read_text()


@pytest.fixture(scope="session")
def birds():
    return load_example("birds")


@pytest.fixture(scope="session")
def nixon():
    return load_example("nixon")


@pytest.fixture(scope="session")
def elephants():
    return load_example("elephants")


@pytest.fixture(scope="session")
def diagnosis():
    return load_example("diagnosis")


EXAMPLE_NAMES = ("birds", "nixon", "elephants", "diagnosis")


def graph_from_links(*links: str, extra_events: tuple[str, ...] = ()):
    """Tiny helper: build a graph from 'a -> b' style strings."""
    kinds = {"->": LinkKind.PROB_POS, "=>": LinkKind.LOGIC_POS,
             "-/>": LinkKind.PROB_NEG, "=/>": LinkKind.LOGIC_NEG}
    b = GraphBuilder()
    for name in extra_events:
        b.add_event(name)
    for spec in links:
        src, arrow, tgt = spec.split()
        s = b.resolve_literal(src.lstrip("!"), positive=not src.startswith("!"))
        t = b.resolve_literal(tgt.lstrip("!"), positive=not tgt.startswith("!"))
        b.add_link(s, t, kinds[arrow])
    return b.build()


# Minimal premise graph per derivation rule, with the conclusion it licenses.
# Each conclusion must hold in every consistent distribution of its graph.
MINIMAL_RULE_GRAPHS: dict[str, dict] = {
    "Symmetry": dict(links=("a -> b",), query="conf(a, b)?"),
    "Negation": dict(links=("a -> b",), query="conf(!b, !a)?"),
    "Specificity": dict(links=("e => b", "e -/> f", "b -> f"), query="conf(!f, b & e)?"),
    "Subclass": dict(links=("e => b",), query="conf(e, b)?"),
    "Resolution": dict(links=("c -> a", "c -> b"), query="conf(a, b)?"),
    "Dilution": dict(links=("a -> b", "b -> c"), fact=("a", "b", "c")),
    "Irrelevance": dict(links=("c -> a",), extra=("b",), query="conf(a, b & c)?"),
    "Relevance": dict(links=("c -> a", "c -> b"), query="conf(a & b, c)?"),
    "ExceptionShield": dict(links=("b => c", "b -/> a", "c -> a"), query="conf(a, !b & c)?"),
    "LogicalInherit": dict(links=("r => e", "x => e", "e -> g", "r -/> g"), query="conf(g, x)?"),
}


def minimal_rule_graph(rule: str):
    spec = MINIMAL_RULE_GRAPHS[rule]
    return graph_from_links(*spec["links"], extra_events=tuple(spec.get("extra", ())))


# ---------------------------------------------------------------------------
# Independent oracle 1: d-separation by exhaustive path enumeration.
# ---------------------------------------------------------------------------


class PathOracle:
    """d-separation by exhaustive enumeration of undirected simple paths.

    Paths between a node pair are enumerated once and reused across
    conditioning sets, which keeps the all-(x,y,z)-triples sweeps cheap.
    """

    def __init__(self, nodes: set[str], edges: set[tuple[str, str]]):
        self.edges = edges
        self.children = defaultdict(set)
        self.neighbors = defaultdict(set)
        for a, b in edges:
            self.children[a].add(b)
            self.neighbors[a].add(b)
            self.neighbors[b].add(a)
        self._desc: dict[str, set[str]] = {}
        self._paths: dict[tuple[str, str], list[list[str]]] = {}

    def descendants(self, v: str) -> set[str]:
        if v not in self._desc:
            seen, stack = set(), [v]
            while stack:
                u = stack.pop()
                for c in self.children[u]:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
            self._desc[v] = seen
        return self._desc[v]

    def paths(self, src: str, dst: str) -> list[list[str]]:
        key = (src, dst) if src <= dst else (dst, src)
        if key not in self._paths:
            found: list[list[str]] = []
            stack = [[key[0]]]
            while stack:
                path = stack.pop()
                for n in sorted(self.neighbors[path[-1]]):
                    if n in path:
                        continue
                    if n == key[1]:
                        found.append(path + [n])
                    else:
                        stack.append(path + [n])
            self._paths[key] = found
        return self._paths[key]

    def path_blocked(self, path: list[str], z: set[str]) -> bool:
        for i in range(1, len(path) - 1):
            prev, w, nxt = path[i - 1], path[i], path[i + 1]
            collider = (prev, w) in self.edges and (nxt, w) in self.edges
            if collider:
                if w not in z and not (self.descendants(w) & z):
                    return True
            elif w in z:
                return True
        return False

    def separated(self, x: set[str], y: set[str], z: set[str]) -> bool:
        for s in sorted(x):
            for t in sorted(y):
                for path in self.paths(s, t):
                    if not self.path_blocked(path, z):
                        return False
        return True


def dsep_bruteforce(edges: set[tuple[str, str]], nodes: set[str], x: set[str], y: set[str], z: set[str]) -> bool:
    return PathOracle(nodes, edges).separated(x, y, z)


def random_dag(rng: random.Random, n_min: int = 3, n_max: int = 8, p_edge: float = 0.35):
    n = rng.randint(n_min, n_max)
    nodes = [f"n{i}" for i in range(n)]
    order = nodes[:]
    rng.shuffle(order)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                edges.add((order[i], order[j]))
    return set(nodes), edges


def graph_from_dag(nodes: set[str], edges: set[tuple[str, str]]):
    b = GraphBuilder()
    for n in sorted(nodes):
        b.add_event(n)
    for a, c in sorted(edges):
        b.add_link(b.resolve_literal(a), b.resolve_literal(c), LinkKind.PROB_POS)
    return b.graph()


def random_valid_graph(rng: random.Random):
    """A structurally valid graph with mixed event styles and link kinds."""
    b = GraphBuilder()
    n_events = rng.randint(1, 6)
    names = [f"{rng.choice('abcdef')}{i}" for i in range(n_events)]
    for name in names:
        style = rng.random()
        if style < 0.6:
            b.add_event(name)
        else:
            outs = [f"{name}_o{j}" for j in range(rng.randint(2, 3))]
            b.add_event(name, outs, closed=style >= 0.8)
    for _ in range(rng.randint(0, 8)):
        if len(names) < 2:
            break
        src_ev, tgt_ev = rng.sample(names, 2)

        def pick(ev_name):
            ev = b._events[ev_name]
            candidates = [o for o in ev.outcomes if o not in ev.synthetic_outcomes() or o.startswith("!")]
            outcome = rng.choice(candidates)
            positive = rng.random() < 0.8
            return Literal(ev_name, outcome, True if ev.is_binary else positive)

        try:
            b.add_link(pick(src_ev), pick(tgt_ev), rng.choice(list(LinkKind)))
        except ConfGraphError:
            pass
    return b.build()


# ---------------------------------------------------------------------------
# Independent oracle 2: explicit factorized tables for numeric CI checks.
# ---------------------------------------------------------------------------


def factorized_table(nodes: list[str], edges: set[tuple[str, str]], rng: np.random.Generator) -> np.ndarray:
    """Joint table over binary nodes (axis i = nodes[i]) factorizing along edges."""
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    joint = np.ones((2,) * n)
    for v in nodes:
        pars = sorted(a for a, b in edges if b == v)
        rows = rng.uniform(0.05, 0.95, size=(2,) * len(pars))
        cpt = np.stack([1 - rows, rows], axis=-1)
        axes = [idx[p] for p in pars] + [idx[v]]
        perm = np.argsort(axes)
        arranged = np.transpose(cpt, perm)
        shape = [1] * n
        for dim, ax in zip(arranged.shape, sorted(axes)):
            shape[ax] = dim
        joint = joint * arranged.reshape(shape)
    return joint


def numeric_ci(joint: np.ndarray, nodes: list[str], x: str, y: str, z: set[str]) -> float:
    """max over assignments of |p(x|y,z) - p(x|z)|, skipping zero-probability rows."""
    idx = {v: i for i, v in enumerate(nodes)}
    others = [v for v in nodes if v not in {x, y} | z]
    sum_axes = tuple(sorted(idx[v] for v in others))
    marg = joint.sum(axis=sum_axes) if sum_axes else joint
    kept = [v for v in nodes if v in {x, y} | z]
    kidx = {v: i for i, v in enumerate(kept)}
    worst = 0.0
    zs = sorted(z)
    for zvals in itertools.product((0, 1), repeat=len(zs)):
        sel = [slice(None)] * len(kept)
        for v, val in zip(zs, zvals):
            sel[kidx[v]] = val
        block = marg[tuple(sel)]  # 2x2 over (x, y) in kept-order
        if kidx[x] > kidx[y]:
            block = block.T
        pz = block.sum()
        if pz <= 0:
            continue
        p_x_given_z = block.sum(axis=1)[1] / pz
        for yval in (0, 1):
            py = block[:, yval].sum()
            if py <= 0:
                continue
            diff = abs(block[1, yval] / py - p_x_given_z)
            worst = max(worst, diff)
    return worst
