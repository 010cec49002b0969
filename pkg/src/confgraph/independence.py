"""Conditional-independence tests over the event DAG.

The base test is standard d-separation, computed with the linear-time
reachability algorithm (the Bayes-ball family): a path is blocked at a chain
or fork node that is conditioned on, and at a collider unless the collider or
one of its descendants is conditioned on. Logical and probabilistic links are
treated identically as directed edges.

Literal-level queries add one refinement: conditioning on literals that pin
their event to a single outcome also pins every outcome forced from them
through logical links, and those forced events join the conditioning set.
Example: with royal => elephant, conditioning on ``royal`` fixes ``elephant``,
which shields elephant's other descendants. Without this, conclusions that
hinge on deterministic shielding are unreachable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional, Union

from .core import (
    EventVariable,
    InferenceGraph,
    Proposition,
    PropositionLike,
    as_proposition,
    pinned_events,
    possible,
)

EventSet = AbstractSet[str]
_UP, _DOWN = 0, 1


def _names(items: Iterable[Union[str, EventVariable]]) -> frozenset[str]:
    return frozenset(i.name if isinstance(i, EventVariable) else i for i in items)


@dataclass(frozen=True)
class SeparationQuery:
    """A d-separation question: are x and y independent given z?"""

    x: frozenset[str]
    y: frozenset[str]
    z: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.x or not self.y:
            raise ValueError("x and y must be nonempty")
        if self.x & self.y or self.x & self.z or self.y & self.z:
            raise ValueError("x, y, z must be pairwise disjoint")

    @staticmethod
    def of(x, y, z=()) -> "SeparationQuery":
        return SeparationQuery(_names(x), _names(y), _names(z))


def d_separated(g: InferenceGraph, x, y=None, z=()) -> bool:
    """Whether every undirected path between x and y is blocked given z.

    Accepts a :class:`SeparationQuery` or three collections of event names
    (or EventVariable values).
    """
    if isinstance(x, SeparationQuery) and y is None:
        q = x
    else:
        q = SeparationQuery.of(x, y, z)
    for n in q.x | q.y | q.z:
        g.event(n)

    key = ("dsep", q.x, q.y, q.z)
    cached = g._memo.get(key)
    if cached is not None:
        return cached

    reachable = _reachable_from(g, q.x, q.z)
    result = not (reachable & q.y)
    g._memo[key] = result
    return result


def _reachable_from(g: InferenceGraph, x: frozenset[str], z: frozenset[str]) -> set[str]:
    """Nodes connected to x by at least one active path given z."""
    ancestors_of_z = set(z)
    stack = list(z)
    while stack:
        n = stack.pop()
        for p in g.parents_of(n):
            if p not in ancestors_of_z:
                ancestors_of_z.add(p)
                stack.append(p)

    visited: set[tuple[str, int]] = set()
    reached: set[str] = set()
    agenda: list[tuple[str, int]] = [(n, _UP) for n in sorted(x)]
    while agenda:
        node, direction = agenda.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in z:
            reached.add(node)
        if direction == _UP and node not in z:
            agenda.extend((p, _UP) for p in g.parents_of(node))
            agenda.extend((c, _DOWN) for c in g.children_of(node))
        elif direction == _DOWN:
            if node not in z:
                agenda.extend((c, _DOWN) for c in g.children_of(node))
            if node in ancestors_of_z:
                agenda.extend((p, _UP) for p in g.parents_of(node))
    return reached


def unconditionally_independent(g: InferenceGraph, a, b) -> bool:
    """d-separation with an empty conditioning set."""
    a, b = _names([a]), _names([b])
    if a == b:
        raise ValueError("events must differ")
    return d_separated(g, a, b, frozenset())


def conditioning_events(g: InferenceGraph, given: Optional[PropositionLike]) -> frozenset[str]:
    """Events observed when ``given`` holds: its own plus any it pins via logical links."""
    if given is None:
        return frozenset()
    prop = as_proposition(given)
    return prop.events | pinned_events(g, prop)


def ci_for_literals(
    g: InferenceGraph,
    a: PropositionLike,
    b: PropositionLike,
    given: Optional[PropositionLike] = None,
) -> bool:
    """Lift event-level d-separation to proposition operands.

    Conservative: returns False whenever the operands' event sets overlap,
    and False when ``given`` is itself impossible. The conditioning set is
    the given events extended by deterministic pinning (see module docs).
    """
    pa, pb = as_proposition(a), as_proposition(b)
    zs = conditioning_events(g, given)
    if pa.events & pb.events or pa.events & zs or pb.events & zs:
        return False
    if given is not None and not possible(g, given):
        return False
    return d_separated(g, pa.events, pb.events, zs)
