"""confgraph: qualitative probabilistic inference over confirmation graphs.

A knowledge base is a DAG of events whose links assert strict probability
shifts (``a -> b`` means p(b|a) > p(b)) or logical implications with a shift
(``a => b`` adds p(b|a) = 1). A fixed catalog of derivation rules, guarded by
d-separation and entailment side conditions, closes the base statements into
everything the topology supports, with a proof tree per statement. A numeric
oracle samples explicit joint distributions consistent with a graph and
checks every derived statement against them.
"""

from .core import (
    EventVariable,
    GraphBuilder,
    InferenceGraph,
    Link,
    LinkKind,
    Literal,
    Proposition,
    ValidationReport,
    add_link,
    entails,
    possible,
    validate,
)
from .dsl import ParseDiagnostic, ParseResult, SourceSpan, parse_graph, parse_query, serialize
from .engine import (
    Closure,
    ConfStatement,
    EngineConfig,
    ProofTree,
    StrengthFact,
    Verdict,
    VerdictKind,
    base_statements,
    close,
    explain,
    query,
)
from .errors import (
    ConfGraphError,
    ContradictoryLogicalLinks,
    CycleIntroduced,
    DuplicateEvent,
    DuplicateLink,
    DuplicateOutcome,
    GraphTooLarge,
    Infeasible,
    MalformedQuery,
    NoProof,
    SelfLink,
    ZeroEvidence,
)
from .independence import SeparationQuery, ci_for_literals, d_separated, unconditionally_independent
from .oracle import (
    JointDistribution,
    SoundnessReport,
    Witness,
    check_dilution,
    find_counterexample,
    holds,
    sample_consistent,
    verify_closure,
)

__version__ = "0.1.0"
