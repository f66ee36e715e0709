"""Decomposable graphs as clique-dependent bipartite states.

The package couples a latent incidence structure between graph nodes and
clique-nodes with a junction graph over the clique-nodes, supports the full
connect/disconnect/promotion move calculus on it, and runs a node-driven
MCMC sampler on top.  Brute-force oracles back the test suite.
"""

__version__ = "0.1.0"

from .errors import (
    ImpermissibleMoveError,
    InvalidPeoError,
    InvalidPromotionError,
    NotDecomposableError,
    ParseError,
    PoolExhaustedError,
    SizeLimitError,
    SubcliqueError,
    UnknownCliqueNodeError,
    UnknownNodeError,
)
from .graphs import (
    CliqueSet,
    JunctionTreeClassic,
    McsResult,
    UndirectedGraph,
    build_junction_tree,
    emit_edge_list,
    factorization_terms,
    fold_log_potential,
    maximal_cliques_chordal,
    mcs_peo,
    parse_edge_list,
    verify_rip,
)
from .moves import (
    Move,
    MoveSets,
    TreeEdit,
    all_moves,
    apply_connect,
    apply_disconnect,
    apply_move,
    choose_promotion,
    disconnect_table,
    format_disconnect_table,
    move_sets,
    move_sets_tree_free,
    promotion_candidates,
    separators_containing,
    tree_free_report,
)
from .sampler import (
    ChainState,
    ProposalSpec,
    conditional_prob,
    constant_affinity,
    enumerate_proposals,
    independent_batches,
    make_affinity,
    make_target,
    mh_step,
    path_joint,
    path_joint_log,
    path_joint_log_indicator,
    path_joint_target,
    restore_chain,
    run_chain,
    run_summary,
    size_affinity,
    subset_proposal_mass,
    trace_text,
    uniform_target,
)
from .state import (
    BipartiteState,
    JunctionGraph,
    RepresentationState,
    Violation,
    from_graph,
    induced_subtree,
    project,
    restore,
    snapshot,
    to_dot,
    verify_clique_dependent,
)

__all__ = [name for name in dir() if not name.startswith("_")]
