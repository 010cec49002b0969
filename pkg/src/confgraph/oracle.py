"""Numeric ground truth: explicit joint distributions consistent with a graph.

The oracle gives every qualitative statement an experiment: sample full joint
probability tables that (a) factorize along the event DAG, (b) satisfy every
link inequality with a strictness margin, logical links exactly, and (c) keep
every outcome possible. A derived statement is sound iff it holds in every
such distribution; a statement is refuted by exhibiting one distribution in
which it fails.

Sampling is rejection-based: each node's conditional table rows are drawn
uniformly from the simplex (rows touched by logical links are fixed to 0/1
before the draw), and the joint is rejected until all constraints hold.
Exactness is favored over scale: the full product space is represented, and
graphs beyond roughly twelve binary events are refused rather than
approximated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    InferenceGraph,
    LinkKind,
    Literal,
    Proposition,
    PropositionLike,
    as_proposition,
    topological_order,
)
from .errors import GraphTooLarge, Infeasible, ZeroEvidence

DEFAULT_MARGIN = 1e-3
DEFAULT_EPS = 1e-9
DEFAULT_MAX_TRIES = 100_000
MAX_TABLE_CELLS = 4096


class JointDistribution:
    """An explicit probability table over the full outcome product space.

    Probability lookups go through per-proposition index masks cached on the
    graph, so evaluating many statements across many sampled tables stays
    cheap.
    """

    __slots__ = ("graph", "event_order", "table", "_flat")

    def __init__(self, graph: InferenceGraph, event_order: Sequence[str], table: np.ndarray):
        self.graph = graph
        self.event_order = tuple(event_order)
        self.table = table
        self._flat = table.reshape(-1)
        total = float(table.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"table sums to {total}, not 1")

    def _mask(self, literals: tuple[Literal, ...]) -> np.ndarray:
        return _mask_indices(self.graph, self.event_order, literals)

    def prob(self, prop: PropositionLike) -> float:
        return float(self._flat[self._mask(as_proposition(prop).literals)].sum())

    def cond(self, subject: PropositionLike, evidence: PropositionLike) -> float:
        """p(subject | evidence); the two may not share events."""
        s, e = as_proposition(subject), as_proposition(evidence)
        if s.events & e.events:
            raise ValueError("subject and evidence share an event")
        pe = self.prob(e)
        if pe <= 0.0:
            raise ZeroEvidence(f"p({e}) = 0")
        both = tuple(sorted(s.literals + e.literals))
        return float(self._flat[self._mask(both)].sum()) / pe

    def marginal(self, event: str, outcome: str) -> float:
        return self.prob(Literal(event, outcome, True))


def _mask_indices(g: InferenceGraph, order: tuple[str, ...], literals: tuple[Literal, ...]) -> np.ndarray:
    """Flat indices of the joint-table cells where all literals hold (cached)."""
    cache = g._memo.setdefault(("masks", order), {})
    hit = cache.get(literals)
    if hit is None:
        hit = np.flatnonzero(_mask_bool(g, order, literals))
        cache[literals] = hit
    return hit


def _mask_bool(g: InferenceGraph, order: tuple[str, ...], literals: tuple[Literal, ...]) -> np.ndarray:
    shape = tuple(len(g.event(n).outcomes) for n in order)
    axis = {name: i for i, name in enumerate(order)}
    keep = np.ones(shape, dtype=bool)
    for lit in literals:
        ev = g.event(lit.event)
        sel = np.zeros(len(ev.outcomes), dtype=bool)
        sel[ev.index(lit.outcome)] = True
        if not lit.positive:
            sel = ~sel
        dims = [1] * len(shape)
        dims[axis[lit.event]] = len(ev.outcomes)
        keep &= sel.reshape(dims)
    return keep.reshape(-1)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass
class _RowForce:
    one: Optional[int] = None  # outcome index forced to probability 1
    zero: frozenset = frozenset()  # outcome indices forced to probability 0
    conflict: bool = False


@dataclass
class _Plan:
    order: list[str]
    parents: dict[str, list[str]]
    shapes: dict[str, int]
    forces: dict[str, dict[tuple[int, ...], _RowForce]]
    margin_literals: list[Literal]
    checks: list[tuple[Literal, Literal, bool]]  # (source, target-as-shifted, logical?)


def _sampler_plan(g: InferenceGraph) -> _Plan:
    cached = g._memo.get("sampler-plan")
    if cached is not None:
        return cached

    order = topological_order(g)
    parents = {n: sorted(g.parents_of(n)) for n in order}
    shapes = {n: len(g.event(n).outcomes) for n in order}
    cells = 1
    for n in order:
        cells *= shapes[n]
    if cells > MAX_TABLE_CELLS:
        raise GraphTooLarge(
            f"joint table would need {cells} cells (cap {MAX_TABLE_CELLS}); "
            "the exact oracle refuses rather than approximate"
        )

    forces: dict[str, dict[tuple[int, ...], _RowForce]] = {}
    for n in order:
        ev = g.event(n)
        incoming = [l for l in g.links if l.kind.is_logical and g.canonical(l.target).event == n]
        if not incoming:
            continue
        per_row: dict[tuple[int, ...], _RowForce] = {}
        pspace = [range(shapes[p]) for p in parents[n]]
        for row in itertools.product(*pspace):
            assignment = {p: g.event(p).outcomes[i] for p, i in zip(parents[n], row)}
            ones: set[int] = set()
            zeros: set[int] = set()
            for link in incoming:
                src = g.canonical(link.source)
                got = assignment[src.event]
                satisfied = (got == src.outcome) if src.positive else (got != src.outcome)
                if not satisfied:
                    continue
                tgt = g.canonical(link.target)
                idx = ev.index(tgt.outcome)
                wants_target_true = (link.kind is LinkKind.LOGIC_POS) == tgt.positive
                if wants_target_true:
                    ones.add(idx)
                else:
                    zeros.add(idx)
            if not ones and not zeros:
                continue
            conflict = len(ones) > 1 or bool(ones & zeros) or len(zeros) == shapes[n]
            per_row[row] = _RowForce(
                one=next(iter(ones)) if len(ones) == 1 and not conflict else None,
                zero=frozenset(zeros),
                conflict=conflict,
            )
        if per_row:
            forces[n] = per_row

    margin_literals = [
        Literal(e.name, o, True) for e in sorted(g.events, key=lambda e: e.name) for o in e.outcomes
    ]
    checks = []
    for link in g.links:
        src = g.canonical(link.source)
        tgt = g.canonical(link.target)
        if link.kind.is_negative:
            tgt = g.negate(tgt)
        checks.append((src, tgt, link.kind.is_logical))
    plan = _Plan(order, parents, shapes, forces, margin_literals, checks)
    g._memo["sampler-plan"] = plan
    return plan


_BATCH = 64


def _draw_joints(g: InferenceGraph, plan: _Plan, rng: np.random.Generator, batch: int) -> np.ndarray:
    """A batch of candidate joints, shape (batch, *outcome-shape).

    Conditional rows are uniform on the simplex (normalized unit
    exponentials); rows pinned by logical links are set to exact 0/1 before
    normalization.
    """
    full_shape = tuple(plan.shapes[n] for n in plan.order)
    axis = {n: i for i, n in enumerate(plan.order)}
    joint = np.ones((batch,) + full_shape)
    for n in plan.order:
        k = plan.shapes[n]
        row_shape = tuple(plan.shapes[p] for p in plan.parents[n])
        raw = rng.gamma(1.0, size=(batch,) + row_shape + (k,))
        for row, force in plan.forces.get(n, {}).items():
            if force.conflict:
                continue  # dead or contradictory row; rejection will decide
            sel = (slice(None),) + row
            if force.one is not None:
                raw[sel] = 0.0
                raw[sel + (force.one,)] = 1.0
            elif force.zero:
                raw[sel + (list(force.zero),)] = 0.0
        cpt = raw / raw.sum(axis=-1, keepdims=True)
        target_axes = [0] + [1 + axis[p] for p in plan.parents[n]] + [1 + axis[n]]
        perm = np.argsort(target_axes)
        arranged = np.transpose(cpt, perm)
        newshape = [1] * (1 + len(full_shape))
        for dim, ax in zip(arranged.shape, sorted(target_axes)):
            newshape[ax] = dim
        joint = joint * arranged.reshape(newshape)
    return joint


def _consistency_masks(g: InferenceGraph, plan: _Plan):
    """Index arrays for vectorized constraint checking over a batch."""
    cached = g._memo.get("consistency-masks")
    if cached is not None:
        return cached
    order = tuple(plan.order)
    margins = [_mask_indices(g, order, (lit,)) for lit in plan.margin_literals]
    links = []
    for src, tgt, logical in plan.checks:
        both = tuple(sorted((src, tgt)))
        links.append(
            (
                _mask_indices(g, order, (src,)),
                _mask_indices(g, order, (tgt,)),
                _mask_indices(g, order, both),
                logical,
            )
        )
    g._memo["consistency-masks"] = (margins, links)
    return margins, links


def _consistent_in_batch(g: InferenceGraph, plan: _Plan, flats: np.ndarray, margin: float) -> np.ndarray:
    """Boolean vector: which candidates in the batch satisfy all constraints."""
    margins, links = _consistency_masks(g, plan)
    ok = np.ones(flats.shape[0], dtype=bool)
    for idx in margins:
        ok &= flats[:, idx].sum(axis=1) >= margin
    for src_idx, tgt_idx, both_idx, logical in links:
        p_src = flats[:, src_idx].sum(axis=1)
        p_tgt = flats[:, tgt_idx].sum(axis=1)
        p_both = flats[:, both_idx].sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(p_src > 0, p_both / p_src, 0.0)
        if logical:
            ok &= (cond >= 1.0 - 1e-9) & (p_tgt <= 1.0 - margin)
        else:
            ok &= cond > p_tgt + margin
    return ok


def ensure_supported(g: InferenceGraph) -> None:
    """Raise :class:`GraphTooLarge` when the joint table would exceed the cap."""
    _sampler_plan(g)


def sample_consistent(
    g: InferenceGraph,
    seed: int,
    max_tries: int = DEFAULT_MAX_TRIES,
    margin: float = DEFAULT_MARGIN,
) -> JointDistribution:
    """One joint distribution consistent with the graph, or :class:`Infeasible`.

    Rejection sampling in fixed-size batches; identical seeds yield identical
    tables, bit for bit.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    plan = _sampler_plan(g)
    rng = np.random.default_rng(seed)
    tried = 0
    while tried < max_tries:
        batch = min(_BATCH, max_tries - tried)
        joints = _draw_joints(g, plan, rng, batch)
        flats = joints.reshape(batch, -1)
        ok = _consistent_in_batch(g, plan, flats, margin)
        hits = np.flatnonzero(ok)
        if hits.size:
            return JointDistribution(g, plan.order, joints[hits[0]])
        tried += batch
    raise Infeasible(
        f"no consistent distribution in {max_tries} tries (seed {seed}); the "
        "graph may be infeasible or the budget/margin too tight",
        tries=max_tries,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def holds(
    dist: JointDistribution,
    subject: PropositionLike,
    evidence: PropositionLike,
    eps: float = DEFAULT_EPS,
) -> bool:
    """Whether p(subject | evidence) exceeds p(subject) by more than eps."""
    return dist.cond(subject, evidence) - dist.prob(subject) > eps


@dataclass(frozen=True)
class Violation:
    seed: int
    statement: str
    p_cond: Optional[float]
    p_prior: float

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "statement": self.statement,
            "p_cond": self.p_cond,
            "p_prior": self.p_prior,
        }


@dataclass
class SoundnessReport:
    graph: str
    n_samples: int
    seeds_run: list[int] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "n_samples": self.n_samples,
            "seeds_run": self.seeds_run,
            "violations": [v.to_dict() for v in self.violations],
        }


def verify_closure(
    g: InferenceGraph,
    closure,
    n_samples: int = 1000,
    seed: int = 42,
    margin: float = DEFAULT_MARGIN,
    eps: float = DEFAULT_EPS,
    max_tries: int = DEFAULT_MAX_TRIES,
    only_exact: bool = False,
) -> SoundnessReport:
    """Evaluate every derived statement against freshly sampled distributions.

    ``closure`` is the engine's closure object (anything with ``statements``
    and ``strength_facts``). With ``only_exact`` the check is limited to
    statements whose proofs carry a full soundness guarantee.
    """
    from .dsl import serialize  # local import: dsl depends only on core

    statements = list(closure.statements)
    facts = list(closure.strength_facts)
    if only_exact:
        statements = [s for s in statements if s.proof.exact]
        facts = [f for f in facts if f.exact]
    report = SoundnessReport(graph=serialize(g), n_samples=n_samples)

    plan = _sampler_plan(g)
    order = tuple(plan.order)
    rows: dict[tuple[Literal, ...], int] = {}

    def row(*parts: Proposition) -> int:
        lits = tuple(sorted({l for p in parts for l in p.literals}))
        if lits not in rows:
            rows[lits] = len(rows)
        return rows[lits]

    st_idx = np.array(
        [[row(s.subject), row(s.evidence), row(s.subject, s.evidence)] for s in statements]
    ).reshape(-1, 3)
    fa_idx = np.array(
        [
            [row(f.subject, f.stronger), row(f.stronger), row(f.subject, f.weaker), row(f.weaker)]
            for f in facts
        ]
    ).reshape(-1, 4)
    cells = int(np.prod([plan.shapes[n] for n in order])) if order else 1
    mask_matrix = np.zeros((len(rows), cells))
    for lits, i in rows.items():
        mask_matrix[i, _mask_indices(g, order, lits)] = 1.0

    for i in range(n_samples):
        s = seed + i
        dist = sample_consistent(g, s, max_tries=max_tries, margin=margin)
        report.seeds_run.append(s)
        p = mask_matrix @ dist._flat
        if len(statements):
            prior, p_e, p_se = p[st_idx[:, 0]], p[st_idx[:, 1]], p[st_idx[:, 2]]
            with np.errstate(divide="ignore", invalid="ignore"):
                cond = np.where(p_e > 0, p_se / p_e, np.nan)
            bad = ~(cond - prior > eps)
            for j in np.flatnonzero(bad):
                st = statements[j]
                p_cond = None if p_e[j] <= 0 else float(cond[j])
                report.violations.append(
                    Violation(s, f"conf({st.subject}, {st.evidence})", p_cond, float(prior[j]))
                )
        if len(facts):
            with np.errstate(divide="ignore", invalid="ignore"):
                strong = np.where(p[fa_idx[:, 1]] > 0, p[fa_idx[:, 0]] / p[fa_idx[:, 1]], np.nan)
                weak = np.where(p[fa_idx[:, 3]] > 0, p[fa_idx[:, 2]] / p[fa_idx[:, 3]], np.nan)
            bad = ~(strong - weak > eps)
            for j in np.flatnonzero(bad):
                f = facts[j]
                report.violations.append(Violation(s, str(f), float(weak[j]), float(strong[j])))
    return report


@dataclass
class Witness:
    """A sampled distribution in which a candidate statement fails."""

    seed: int
    distribution: JointDistribution
    p_subject: float
    p_cond: float
    p_evidence: float


def find_counterexample(
    g: InferenceGraph,
    subject: PropositionLike,
    evidence: PropositionLike,
    n_samples: int = 1000,
    seed: int = 42,
    margin: float = DEFAULT_MARGIN,
    eps: float = DEFAULT_EPS,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> Optional[Witness]:
    """First sampled consistent distribution where conf(subject, evidence) fails."""
    subject, evidence = as_proposition(subject), as_proposition(evidence)
    for i in range(n_samples):
        s = seed + i
        dist = sample_consistent(g, s, max_tries=max_tries, margin=margin)
        try:
            p_cond = dist.cond(subject, evidence)
        except ZeroEvidence:
            continue
        p_subj = dist.prob(subject)
        if p_cond - p_subj <= eps:
            return Witness(s, dist, p_subj, p_cond, dist.prob(evidence))
    return None


def check_dilution(
    g: InferenceGraph,
    fact,
    n_samples: int = 1000,
    seed: int = 42,
    margin: float = DEFAULT_MARGIN,
    eps: float = DEFAULT_EPS,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> list[Violation]:
    """Check one strength ordering p(subject|stronger) > p(subject|weaker)."""
    out = []
    for i in range(n_samples):
        s = seed + i
        dist = sample_consistent(g, s, max_tries=max_tries, margin=margin)
        strong = dist.cond(fact.subject, fact.stronger)
        weak = dist.cond(fact.subject, fact.weaker)
        if strong - weak <= eps:
            out.append(
                Violation(s, f"p({fact.subject} | {fact.stronger}) > p({fact.subject} | {fact.weaker})", weak, strong)
            )
    return out
