"""Exact graph pattern matching by iterative constraint-checking pruning.

The package prunes a large vertex-labeled background graph down to the
exact set of vertices and edges participating in matches of a small
template, then enumerates or counts the matches on the pruned remainder.
"""

from .enumeration import (
    MatchCount,
    automorphism_order,
    count,
    enumerate_matches,
    match_support,
)
from .graph import (
    GraphStats,
    LabeledGraph,
    build_graph,
    compute_stats,
    induce_active_subgraph,
    load_edge_list,
    load_labels,
)
from .pipeline import (
    PruneConfig,
    SolutionSubgraph,
    plan_constraints,
    prune,
    resume,
)
from .scenarios import (
    ExploreResult,
    Session,
    exploratory_search,
)
from .template import (
    ConstraintSet,
    NonLocalConstraint,
    Template,
    TemplateAnalysis,
    analyze,
    generate_constraints,
    make_template,
    parse_template,
    parse_template_text,
    template_to_text,
    walk_to_string,
)

__version__ = "0.1.0"

__all__ = [
    "GraphStats",
    "LabeledGraph",
    "build_graph",
    "compute_stats",
    "induce_active_subgraph",
    "load_edge_list",
    "load_labels",
    "ConstraintSet",
    "NonLocalConstraint",
    "Template",
    "TemplateAnalysis",
    "analyze",
    "generate_constraints",
    "make_template",
    "parse_template",
    "parse_template_text",
    "template_to_text",
    "walk_to_string",
    "PruneConfig",
    "SolutionSubgraph",
    "plan_constraints",
    "prune",
    "resume",
    "MatchCount",
    "automorphism_order",
    "count",
    "enumerate_matches",
    "match_support",
    "ExploreResult",
    "Session",
    "exploratory_search",
    "__version__",
]
