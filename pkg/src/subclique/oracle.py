"""Brute-force references for tests and acceptance runs.

Everything here is deliberately independent of the incremental algorithms it
cross-checks: chordality is decided by exhaustive elimination search, and
single-bit flips of the incidence structure are validated by rebuilding the
junction graph from scratch rather than by the edit procedures.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from .errors import SizeLimitError
from .graphs import UndirectedGraph, build_junction_tree, mcs_peo
from .state import (
    BipartiteState,
    JunctionGraph,
    RepresentationState,
    verify_clique_dependent,
)

# Large enough for the bundled 9-node worked example; the memoized subset
# search stays trivial at this size.
REFERENCE_LIMIT = 9
CENSUS_LIMIT = 5
FLIP_SWEEP_LIMIT = 9


def reference_chordality(g: UndirectedGraph) -> bool:
    """Exhaustive elimination search: the graph is chordal iff some
    elimination ordering is perfect.

    Tries every simplicial choice recursively with memoization on the
    remaining vertex set, so no structural shortcut of the incremental
    recogniser is shared.  Limited to 8 nodes.
    """
    n = g.node_count
    if n > REFERENCE_LIMIT:
        raise SizeLimitError(f"reference chordality is limited to {REFERENCE_LIMIT} nodes")
    adj = [frozenset(g.neighbors(v)) for v in range(n)]
    full = (1 << n) - 1

    def bits(mask: int):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    memo: dict[int, bool] = {}

    def solve(mask: int) -> bool:
        if mask == 0:
            return True
        if mask in memo:
            return memo[mask]
        ok = False
        for v in bits(mask):
            nbrs = [u for u in bits(mask) if u != v and u in adj[v]]
            simplicial = all(
                u2 in adj[u1] for u1, u2 in itertools.combinations(nbrs, 2)
            )
            if simplicial and solve(mask & ~(1 << v)):
                ok = True
                break
        memo[mask] = ok
        return ok

    return solve(full)


@dataclass
class GraphCensus:
    """Complete census of decomposable graphs on ``n`` labelled nodes.

    Each graph is an edge-set bitmask over the pair(i, j), i < j, ordered
    lexicographically.
    """

    n: int
    chordal_graphs: list[int]

    @property
    def count(self) -> int:
        return len(self.chordal_graphs)

    def pairs(self) -> list[tuple[int, int]]:
        return list(itertools.combinations(range(self.n), 2))

    def graph_from_mask(self, mask: int) -> UndirectedGraph:
        return graph_from_mask(self.n, mask)

    def export_text(self) -> str:
        lines = [f"census {self.n} {self.count}"]
        lines += [format(mask, "x") for mask in self.chordal_graphs]
        return "\n".join(lines) + "\n"


def graph_from_mask(n: int, mask: int) -> UndirectedGraph:
    g = UndirectedGraph(n)
    for idx, (u, v) in enumerate(itertools.combinations(range(n), 2)):
        if mask >> idx & 1:
            g.add_edge(u, v)
    return g


def graph_to_mask(g: UndirectedGraph) -> int:
    mask = 0
    for idx, (u, v) in enumerate(itertools.combinations(range(g.node_count), 2)):
        if g.has_edge(u, v):
            mask |= 1 << idx
    return mask


def enumerate_decomposable(n: int) -> GraphCensus:
    """Sweep all 2^(n choose 2) labelled graphs; limited to n <= 5."""
    if n > CENSUS_LIMIT:
        raise SizeLimitError(f"census is limited to {CENSUS_LIMIT} nodes")
    n_pairs = n * (n - 1) // 2
    found = [
        mask
        for mask in range(1 << n_pairs)
        if reference_chordality(graph_from_mask(n, mask))
    ]
    return GraphCensus(n=n, chordal_graphs=found)


# ---------------------------------------------------------------------------
# Brute-force single-flip move oracle
# ---------------------------------------------------------------------------


def _projection_is_chordal(g: UndirectedGraph) -> bool:
    if g.node_count <= REFERENCE_LIMIT:
        return reference_chordality(g)
    # Above the exhaustive limit fall back on the recogniser, which the
    # acceptance suite cross-validates against the exhaustive search.
    return mcs_peo(g).is_chordal


def _canonical_state(
    template: RepresentationState, memberships: dict[int, frozenset[int]]
) -> RepresentationState | None:
    """Rebuild a full state from raw memberships: re-derive maximal flags,
    re-run junction-forest construction, and re-attach sub-cliques to every
    nesting maximal clique-node.  Returns None when no valid assignment
    exists."""
    z = BipartiteState(template.z.node_count, template.z.labels, pool_cap=None)
    z.pool_cap = max(z.pool_cap, len(memberships), 1)
    for cid in sorted(memberships):
        z.install(cid, 0, memberships[cid])
    graph = UndirectedGraph(z.node_count)
    for members in memberships.values():
        ms = sorted(members)
        for i_idx, u in enumerate(ms):
            for v in ms[i_idx + 1 :]:
                graph.add_edge(u, v)
    if not _projection_is_chordal(graph):
        return None
    gx = nx.Graph()
    gx.add_nodes_from(range(z.node_count))
    gx.add_edges_from(graph.edges())
    true_maximal = {frozenset(c) for c in nx.find_cliques(gx)} if z.node_count else set()
    flags: dict[frozenset[int], int] = {}
    for cid in sorted(memberships):
        m = frozenset(memberships[cid])
        if m in true_maximal and m not in flags:
            flags[m] = cid
    if set(flags) != true_maximal:
        return None
    t = JunctionGraph()
    for cid in memberships:
        t.add_vertex(cid)
    for cid in flags.values():
        t.set_maximal(cid)
    # Junction forest over the flagged cliques, in deterministic order.
    res = mcs_peo(graph)
    if res.peo is None:
        return None
    from .graphs import maximal_cliques_chordal

    cs = maximal_cliques_chordal(graph, res.peo)
    jt = build_junction_tree(cs)
    index_of = {frozenset(c): i for i, c in enumerate(jt.clique_nodes)}
    id_for = {index_of[m]: cid for m, cid in flags.items()}
    for a, b, _sep in jt.tree_edges:
        t.add_edge(id_for[a], id_for[b])
    # Attach each sub-clique to every maximal clique-node nesting it.
    for cid in memberships:
        if cid in t.maximal:
            continue
        parents = [
            mcid for m, mcid in flags.items() if frozenset(memberships[cid]) <= m
        ]
        if not parents:
            return None
        for p in parents:
            t.add_edge(cid, p)
    return RepresentationState(z, t)


def brute_force_moves(
    state: RepresentationState,
) -> set[tuple[int, int, int]]:
    """All single z-bit flips that admit a valid canonical completion.

    Returns triples (clique-node id, node id, new bit).  For a disconnect
    flip the completion may also drop any subset of the sub-cliques that
    contain the node and touch the flipped clique-node (the promotion
    machinery's discard set); a flip is kept if any completion passes
    :func:`verify_clique_dependent`.
    """
    if state.node_count > FLIP_SWEEP_LIMIT:
        raise SizeLimitError(f"flip sweep is limited to {FLIP_SWEEP_LIMIT} nodes")
    base = {cid: state.z.members_of(cid) for cid in state.live()}
    valid: set[tuple[int, int, int]] = set()
    for cid in sorted(base):
        for i in range(state.node_count):
            bit = i in base[cid]
            flipped = dict(base)
            if bit:
                flipped[cid] = base[cid] - {i}
            else:
                flipped[cid] = base[cid] | {i}
            if not flipped[cid]:
                del flipped[cid]
            droppable = sorted(
                x
                for x in base
                if x != cid
                and x not in state.t.maximal
                and i in base[x]
                and state.t.has_edge(x, cid)
            )
            found = False
            for r in range(len(droppable) + 1):
                for drop in itertools.combinations(droppable, r):
                    cand = {
                        c: m for c, m in flipped.items() if c not in set(drop)
                    }
                    uncovered = set(range(state.node_count)) - set().union(
                        *cand.values()
                    ) if cand else set(range(state.node_count))
                    if uncovered:
                        # a node left with no clique-node gets a fresh singleton
                        next_id = max(cand, default=-1) + 1
                        for extra in sorted(uncovered):
                            cand[next_id] = frozenset({extra})
                            next_id += 1
                    rebuilt = _canonical_state(state, cand)
                    if rebuilt is not None and verify_clique_dependent(
                        rebuilt.z, rebuilt.t
                    ) is None:
                        found = True
                        break
                if found:
                    break
            if found:
                valid.add((cid, i, 0 if bit else 1))
    return valid
