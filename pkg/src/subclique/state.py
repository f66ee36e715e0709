"""The clique-dependent bipartite state.

A state couples two structures:

* ``BipartiteState`` -- the incidence structure Z between graph nodes and
  latent clique-nodes.  Each clique-node owns a membership set of node ids;
  a reverse index maps nodes to the clique-nodes containing them.
* ``JunctionGraph`` -- the graph T on clique-nodes, with a flagged subset of
  maximal clique-nodes.  The restriction of T to the flagged subset must be a
  junction forest of the projected decomposable graph; non-flagged
  clique-nodes (sub-cliques) hang off clique-nodes whose membership contains
  them.

Clique-node ids come from an elastic pool: retired slots are reused with a
bumped generation counter so (id, generation) pairs never repeat within a
run.  The pool is capped (default four clique-nodes per graph node).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import networkx as nx

from .errors import (
    NotDecomposableError,
    ParseError,
    PoolExhaustedError,
    UnknownCliqueNodeError,
    UnknownNodeError,
)
from .graphs import (
    UndirectedGraph,
    build_junction_tree,
    maximal_cliques_chordal,
    mcs_peo,
)

DEFAULT_POOL_FACTOR = 4


@dataclass(frozen=True)
class CliqueNodeRef:
    """Stable reference to a clique-node slot: (id, generation)."""

    id: int
    generation: int


class BipartiteState:
    """Incidence structure between nodes and clique-nodes (the Z matrix)."""

    def __init__(self, node_count: int, labels: Optional[list[str]] = None,
                 pool_cap: Optional[int] = None):
        self.node_count = node_count
        self.labels = list(labels) if labels is not None else None
        self.pool_cap = (
            pool_cap if pool_cap is not None else DEFAULT_POOL_FACTOR * node_count
        )
        self.members: dict[int, set[int]] = {}
        self.node_cliques: dict[int, set[int]] = {i: set() for i in range(node_count)}
        self.generation: dict[int, int] = {}
        self._retired_generation: dict[int, int] = {}
        self._next_id = 0

    # -- pool -------------------------------------------------------------

    def live(self) -> list[int]:
        return sorted(self.members)

    def is_live(self, cid: int) -> bool:
        return cid in self.members

    def ref(self, cid: int) -> CliqueNodeRef:
        self._check_cid(cid)
        return CliqueNodeRef(cid, self.generation[cid])

    def _check_cid(self, cid: int) -> None:
        if cid not in self.members:
            raise UnknownCliqueNodeError(f"clique-node {cid} is not live")

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.node_count:
            raise UnknownNodeError(f"node {i} not in state of size {self.node_count}")

    def allocate(self, members: Iterable[int]) -> int:
        """Create a clique-node, reusing the lowest retired slot if any."""
        if len(self.members) + 1 > self.pool_cap:
            raise PoolExhaustedError(
                f"clique-node pool cap {self.pool_cap} exceeded"
            )
        if self._retired_generation:
            cid = min(self._retired_generation)
            gen = self._retired_generation.pop(cid) + 1
        else:
            cid = self._next_id
            self._next_id += 1
            gen = 0
        self.install(cid, gen, members)
        return cid

    def install(self, cid: int, gen: int, members: Iterable[int]) -> None:
        """Install an explicit (id, generation, members) slot; used by
        document restore and edit replay."""
        if cid in self.members:
            raise ValueError(f"clique-node {cid} already live")
        members = set(members)
        for i in members:
            self._check_node(i)
        self.members[cid] = members
        self.generation[cid] = gen
        self._retired_generation.pop(cid, None)
        self._next_id = max(self._next_id, cid + 1)
        for i in members:
            self.node_cliques[i].add(cid)

    def retire(self, cid: int) -> None:
        self._check_cid(cid)
        for i in self.members[cid]:
            self.node_cliques[i].discard(cid)
        self._retired_generation[cid] = self.generation[cid]
        del self.members[cid]
        del self.generation[cid]

    # -- incidence bits ----------------------------------------------------

    def members_of(self, cid: int) -> frozenset[int]:
        self._check_cid(cid)
        return frozenset(self.members[cid])

    def cliques_of(self, i: int) -> frozenset[int]:
        self._check_node(i)
        return frozenset(self.node_cliques[i])

    def set_bit(self, cid: int, i: int) -> None:
        self._check_cid(cid)
        self._check_node(i)
        self.members[cid].add(i)
        self.node_cliques[i].add(cid)

    def clear_bit(self, cid: int, i: int) -> None:
        self._check_cid(cid)
        self._check_node(i)
        self.members[cid].discard(i)
        self.node_cliques[i].discard(cid)

    def node_label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def node_by_label(self, name: str) -> int:
        if self.labels is not None and name in self.labels:
            return self.labels.index(name)
        try:
            i = int(name)
        except ValueError:
            raise UnknownNodeError(f"unknown node label {name!r}")
        self._check_node(i)
        return i

    def clone(self) -> "BipartiteState":
        z = BipartiteState(self.node_count, self.labels, self.pool_cap)
        z.members = {cid: set(m) for cid, m in self.members.items()}
        z.node_cliques = {i: set(c) for i, c in self.node_cliques.items()}
        z.generation = dict(self.generation)
        z._retired_generation = dict(self._retired_generation)
        z._next_id = self._next_id
        return z


class JunctionGraph:
    """The graph T over clique-nodes with maximal flags."""

    def __init__(self):
        self.adj: dict[int, set[int]] = {}
        self.maximal: set[int] = set()

    def add_vertex(self, cid: int) -> None:
        self.adj.setdefault(cid, set())

    def remove_vertex(self, cid: int) -> None:
        for other in self.adj.pop(cid, set()):
            self.adj[other].discard(cid)
        self.maximal.discard(cid)

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("junction graph edges must join distinct clique-nodes")
        self.adj[a].add(b)
        self.adj[b].add(a)

    def remove_edge(self, a: int, b: int) -> None:
        self.adj[a].discard(b)
        self.adj[b].discard(a)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj.get(a, ())

    def neighbors(self, cid: int) -> set[int]:
        return set(self.adj.get(cid, ()))

    def edges(self) -> list[tuple[int, int]]:
        return sorted(
            (min(a, b), max(a, b))
            for a in self.adj
            for b in self.adj[a]
            if a < b
        )

    def set_maximal(self, cid: int) -> None:
        self.maximal.add(cid)

    def clear_maximal(self, cid: int) -> None:
        self.maximal.discard(cid)

    def junction_neighbors(self, cid: int) -> set[int]:
        """T(C)-neighbours: adjacent clique-nodes that are flagged maximal."""
        return self.adj.get(cid, set()) & self.maximal

    def parents(self, cid: int) -> set[int]:
        """Maximal T-neighbours of a sub-clique (its parent cliques)."""
        return self.junction_neighbors(cid)

    def maximal_components(self) -> list[set[int]]:
        """Connected components of T restricted to maximal clique-nodes."""
        seen: set[int] = set()
        comps = []
        for start in sorted(self.maximal):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if y in self.maximal and y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            comps.append(comp)
        return comps

    def clone(self) -> "JunctionGraph":
        t = JunctionGraph()
        t.adj = {cid: set(nbrs) for cid, nbrs in self.adj.items()}
        t.maximal = set(self.maximal)
        return t


class RepresentationState:
    """A bipartite state Z together with its junction graph T."""

    def __init__(self, z: BipartiteState, t: JunctionGraph):
        self.z = z
        self.t = t

    # -- convenience accessors ---------------------------------------------

    @property
    def node_count(self) -> int:
        return self.z.node_count

    def live(self) -> list[int]:
        return self.z.live()

    def members_of(self, cid: int) -> frozenset[int]:
        return self.z.members_of(cid)

    def is_maximal(self, cid: int) -> bool:
        return cid in self.t.maximal

    def maximal_ids(self) -> list[int]:
        return sorted(self.t.maximal)

    def sub_ids(self) -> list[int]:
        return sorted(set(self.z.members) - self.t.maximal)

    def node_label(self, i: int) -> str:
        return self.z.node_label(i)

    def render_members(self, members: Iterable[int]) -> str:
        """Human-readable name for a node-set, e.g. ``ABCD``.

        Single-character labels are concatenated; anything else is
        comma-joined.  The empty set renders as ``-``.
        """
        labels = sorted(self.z.node_label(i) for i in members)
        if not labels:
            return "-"
        if all(len(s) == 1 for s in labels):
            return "".join(labels)
        return ",".join(labels)

    def clique_label(self, cid: int) -> str:
        return self.render_members(self.z.members_of(cid))

    def resolve_clique(self, token: str) -> int:
        """Resolve ``#<id>`` or a membership label like ``ACD`` to a live
        clique-node id.  Ambiguous labels raise with the matching ids."""
        if token.startswith("#"):
            cid = int(token[1:])
            self.z._check_cid(cid)
            return cid
        matches = [cid for cid in self.live() if self.clique_label(cid) == token]
        if not matches:
            raise UnknownCliqueNodeError(f"no clique-node labelled {token!r}")
        if len(matches) > 1:
            ids = ", ".join(f"#{c}" for c in matches)
            raise UnknownCliqueNodeError(
                f"label {token!r} is ambiguous ({ids}); use #<id>"
            )
        return matches[0]

    def clone(self) -> "RepresentationState":
        return RepresentationState(self.z.clone(), self.t.clone())

    # -- structure ----------------------------------------------------------

    def project(self) -> UndirectedGraph:
        return project(self.z)

    def canonical_key(self):
        """Hashable key identifying the state up to clique-node id renaming.

        Clique-nodes are described by (maximal flag, membership) and refined
        twice with neighbour descriptors; memberships are concrete node ids,
        which makes the refinement effectively exact at this problem's scale.
        """
        desc0 = {
            cid: (cid in self.t.maximal, tuple(sorted(m)))
            for cid, m in self.z.members.items()
        }
        desc1 = {
            cid: (desc0[cid], tuple(sorted(desc0[n] for n in self.t.adj[cid])))
            for cid in desc0
        }
        desc2 = {
            cid: (desc1[cid], tuple(sorted(desc1[n] for n in self.t.adj[cid])))
            for cid in desc0
        }
        edges = sorted(
            tuple(sorted((desc2[a], desc2[b]))) for a, b in self.t.edges()
        )
        return (
            self.node_count,
            tuple(sorted(desc2.values())),
            tuple(edges),
        )

    def __repr__(self) -> str:
        return (
            f"RepresentationState(nodes={self.node_count}, "
            f"maximal={len(self.t.maximal)}, subs={len(self.sub_ids())})"
        )


# ---------------------------------------------------------------------------
# Projection and validation
# ---------------------------------------------------------------------------


def project(z: BipartiteState) -> UndirectedGraph:
    """Project the bipartite state to its undirected graph: nodes are
    adjacent iff they share a clique-node."""
    g = UndirectedGraph(z.node_count, z.labels)
    for members in z.members.values():
        ms = sorted(members)
        for a_idx, u in enumerate(ms):
            for v in ms[a_idx + 1 :]:
                g.add_edge(u, v)
    return g


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def verify_clique_dependent(
    z: BipartiteState, t: JunctionGraph
) -> Optional[Violation]:
    """Check that (Z, T) is a valid maximal clique-dependent bipartite state.

    Returns None when valid, otherwise the first violation found:

    1. structural consistency (no empty clique-node, every node covered,
       T vertices match live clique-nodes);
    2. the maximal flags index exactly the maximal cliques of the projection,
       one flag per clique;
    3. T restricted to the flagged subset is a forest in which, for every
       graph node, the flagged clique-nodes containing it induce a connected
       subtree (the junction-forest property, equivalent to RIP);
    4. every sub-clique's membership is contained in each T-neighbour's
       membership.
    """
    live = set(z.members)
    if set(t.adj) != live:
        return Violation("vertex-mismatch", "T vertices differ from live clique-nodes")
    if not t.maximal <= live:
        return Violation("vertex-mismatch", "maximal flag on retired clique-node")
    for cid, members in z.members.items():
        if not members:
            return Violation("empty-clique-node", f"clique-node {cid} is empty")
    for i in range(z.node_count):
        if not z.node_cliques[i]:
            return Violation("node-uncovered", f"node {z.node_label(i)} is in no clique-node")

    # Maximal flags must index the projection's maximal cliques exactly.
    graph = project(z)
    gx = nx.Graph()
    gx.add_nodes_from(range(z.node_count))
    gx.add_edges_from(graph.edges())
    true_maximal = {frozenset(c) for c in nx.find_cliques(gx)} if z.node_count else set()
    flagged: dict[frozenset[int], int] = {}
    for cid in t.maximal:
        m = frozenset(z.members[cid])
        if m in flagged:
            return Violation(
                "duplicate-maximal-flag",
                f"clique-nodes {flagged[m]} and {cid} both flagged for the same clique",
            )
        flagged[m] = cid
    missing = true_maximal - set(flagged)
    if missing:
        some = sorted(next(iter(missing)))
        return Violation("uncovered-maximal-clique", f"maximal clique {some} has no flagged clique-node")
    extra = set(flagged) - true_maximal
    if extra:
        some = sorted(next(iter(extra)))
        return Violation("flag-not-maximal", f"flagged membership {some} is not a maximal clique")

    # T(C) must be a forest.
    comps = t.maximal_components()
    n_edges = sum(
        1 for a, b in t.edges() if a in t.maximal and b in t.maximal
    )
    if n_edges != len(t.maximal) - len(comps):
        return Violation("tc-not-forest", "T restricted to maximal clique-nodes has a cycle")

    # Junction-forest property: each node's maximal clique-nodes connected.
    comp_of = {}
    for idx, comp in enumerate(comps):
        for cid in comp:
            comp_of[cid] = idx
    for i in range(z.node_count):
        holders = sorted(c for c in z.node_cliques[i] if c in t.maximal)
        if not holders:
            return Violation(
                "node-uncovered", f"node {z.node_label(i)} is in no maximal clique-node"
            )
        if len({comp_of[c] for c in holders}) > 1:
            return Violation(
                "node-cliques-disconnected",
                f"maximal clique-nodes of node {z.node_label(i)} span several components",
            )
        # connectivity within the component
        seen = {holders[0]}
        stack = [holders[0]]
        holder_set = set(holders)
        while stack:
            x = stack.pop()
            for y in t.adj[x]:
                if y in holder_set and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != holder_set:
            return Violation(
                "node-cliques-disconnected",
                f"maximal clique-nodes of node {z.node_label(i)} are not T-connected",
            )

    # Sub-clique nesting along every incident edge.
    for a, b in t.edges():
        for x, other in ((a, b), (b, a)):
            if x not in t.maximal and not z.members[x] <= z.members[other]:
                return Violation(
                    "sub-not-nested",
                    f"sub-clique {sorted(z.members[x])} not contained in neighbour "
                    f"{sorted(z.members[other])}",
                )
    return None


# ---------------------------------------------------------------------------
# Induced subtrees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InducedSubtree:
    """T restricted to the clique-nodes containing one graph node."""

    node: int
    vertices: frozenset[int]
    maximal_vertices: frozenset[int]
    sub_vertices: frozenset[int]
    maximal_edges: tuple[tuple[int, int], ...]

    def maximal_degree(self, cid: int) -> int:
        return sum(1 for a, b in self.maximal_edges if cid in (a, b))


def induced_subtree(state: RepresentationState, i: int) -> InducedSubtree:
    """The subtree of T induced by the clique-nodes containing node ``i``.

    The maximal part is connected within each T(C) component for valid
    states (a consequence of the junction-forest property).
    """
    state.z._check_node(i)
    verts = frozenset(state.z.node_cliques[i])
    max_verts = frozenset(v for v in verts if v in state.t.maximal)
    max_edges = tuple(
        sorted(
            (min(a, b), max(a, b))
            for a in max_verts
            for b in state.t.adj[a]
            if b in max_verts and a < b
        )
    )
    return InducedSubtree(
        node=i,
        vertices=verts,
        maximal_vertices=max_verts,
        sub_vertices=verts - max_verts,
        maximal_edges=max_edges,
    )


# ---------------------------------------------------------------------------
# Construction from a decomposable graph
# ---------------------------------------------------------------------------


def from_graph(g: UndirectedGraph, pool_cap: Optional[int] = None) -> RepresentationState:
    """Build a state with one maximal clique-node per maximal clique of a
    decomposable graph and no sub-cliques."""
    res = mcs_peo(g)
    if not res.is_chordal:
        raise NotDecomposableError(res.failure.describe(g))
    cs = maximal_cliques_chordal(g, res.peo)
    jt = build_junction_tree(cs)
    z = BipartiteState(g.node_count, g.labels, pool_cap)
    t = JunctionGraph()
    ids = []
    for clique in jt.clique_nodes:
        cid = z.allocate(clique)
        t.add_vertex(cid)
        t.set_maximal(cid)
        ids.append(cid)
    for a, b, _sep in jt.tree_edges:
        t.add_edge(ids[a], ids[b])
    return RepresentationState(z, t)


# ---------------------------------------------------------------------------
# Canonical text document
# ---------------------------------------------------------------------------

_HEADER = "subclique-state 1"


def snapshot(state: RepresentationState) -> str:
    """Serialize to the canonical text document (sorted, LF-terminated)."""
    z, t = state.z, state.t
    lines = [_HEADER, f"nodes {z.node_count}"]
    if z.labels is not None:
        for i in range(z.node_count):
            lines.append(f"node {i} {z.labels[i]}")
    for cid in z.live():
        flag = "M" if cid in t.maximal else "S"
        members = ",".join(str(m) for m in sorted(z.members[cid]))
        lines.append(f"clique_node {cid} {z.generation[cid]} {flag} {members}")
    for a, b in t.edges():
        lines.append(f"t_edge {a} {b}")
    return "\n".join(lines) + "\n"


def restore(text: str, pool_cap: Optional[int] = None) -> RepresentationState:
    """Parse a state document.  Validation is separate: a document that
    violates the clique-dependence conditions still restores."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != _HEADER:
        raise ParseError(f"missing '{_HEADER}' header", line=1)
    node_count = None
    labels: dict[int, str] = {}
    clique_rows: list[tuple[int, int, int, bool, set[int]]] = []
    edge_rows: list[tuple[int, int, int]] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "nodes":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("expected 'nodes <count>'", line=line_no)
            node_count = int(parts[1])
        elif kind == "node":
            if len(parts) != 3 or not parts[1].isdigit():
                raise ParseError("expected 'node <id> <label>'", line=line_no)
            labels[int(parts[1])] = parts[2]
        elif kind == "clique_node":
            if len(parts) != 5:
                raise ParseError(
                    "expected 'clique_node <id> <gen> <M|S> <members>'", line=line_no
                )
            try:
                cid, gen = int(parts[1]), int(parts[2])
                members = {int(x) for x in parts[4].split(",") if x != ""}
            except ValueError:
                raise ParseError("non-integer id in clique_node row", line=line_no)
            if parts[3] not in ("M", "S"):
                raise ParseError(
                    f"flag must be M or S, got {parts[3]!r}", line=line_no, field="flag"
                )
            if not members:
                raise ParseError("clique_node must have members", line=line_no)
            clique_rows.append((line_no, cid, gen, parts[3] == "M", members))
        elif kind == "t_edge":
            if len(parts) != 3:
                raise ParseError("expected 't_edge <a> <b>'", line=line_no)
            try:
                edge_rows.append((line_no, int(parts[1]), int(parts[2])))
            except ValueError:
                raise ParseError("non-integer id in t_edge row", line=line_no)
        else:
            raise ParseError(f"unknown record {kind!r}", line=line_no)
    if node_count is None:
        raise ParseError("missing 'nodes <count>' record")
    label_list = None
    if labels:
        if set(labels) != set(range(node_count)):
            raise ParseError("node labels must cover ids 0..n-1 when present")
        label_list = [labels[i] for i in range(node_count)]
    z = BipartiteState(node_count, label_list, pool_cap)
    if pool_cap is None:
        z.pool_cap = max(z.pool_cap, len(clique_rows))
    t = JunctionGraph()
    for line_no, cid, gen, is_max, members in clique_rows:
        if any(not 0 <= m < node_count for m in members):
            raise ParseError("member outside node range", line=line_no)
        try:
            z.install(cid, gen, members)
        except ValueError:
            raise ParseError(f"duplicate clique-node id {cid}", line=line_no)
        t.add_vertex(cid)
        if is_max:
            t.set_maximal(cid)
    for line_no, a, b in edge_rows:
        if not (z.is_live(a) and z.is_live(b)):
            raise ParseError(f"t_edge ({a}, {b}) references unknown clique-node", line=line_no)
        if a == b:
            raise ParseError("t_edge endpoints must differ", line=line_no)
        t.add_edge(a, b)
    return RepresentationState(z, t)


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def to_dot(state: RepresentationState) -> str:
    """Emit the junction graph in DOT form.

    Maximal clique-nodes are solid red ellipses, sub-cliques dashed; edges of
    the junction forest T(C) are solid, all other edges dashed.  Output
    ordering is stable.
    """
    z, t = state.z, state.t
    lines = ["graph junction {", "  node [shape=ellipse];"]
    for cid in z.live():
        label = state.clique_label(cid)
        if cid in t.maximal:
            style = 'color=red, style=solid'
        else:
            style = 'color=gray40, style=dashed'
        lines.append(f'  cn{cid} [label="{label}", {style}];')
    for a, b in t.edges():
        style = "solid" if a in t.maximal and b in t.maximal else "dashed"
        lines.append(f"  cn{a} -- cn{b} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
