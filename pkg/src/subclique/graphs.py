"""Classical decomposable-graph machinery.

Undirected graphs with dense integer node ids, maximum cardinality search,
maximal-clique extraction along a perfect ordering, junction forests with the
running intersection property, and clique/separator factorization terms.

All functions here are pure with respect to their inputs: graphs passed in are
never mutated, and returned values are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import InvalidPeoError, ParseError, UnknownNodeError

NodeSet = frozenset  # sets of node ids


class UndirectedGraph:
    """A simple undirected graph on nodes 0..n-1 with optional display labels.

    No self-loops; the adjacency structure is kept symmetric. Labels, when
    present, must be unique.
    """

    def __init__(self, node_count: int, labels: Optional[list[str]] = None):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        if labels is not None:
            if len(labels) != node_count:
                raise ValueError("labels must match node_count")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be unique")
        self.node_count = node_count
        self.labels = list(labels) if labels is not None else None
        self._adj: list[set[int]] = [set() for _ in range(node_count)]

    def _check(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise UnknownNodeError(f"node {v} not in graph of size {self.node_count}")

    def add_edge(self, u: int, v: int) -> None:
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError("self-loops are not allowed")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: int) -> set[int]:
        self._check(v)
        return set(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.node_count) for v in self._adj[u] if u < v]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def label(self, v: int) -> str:
        if self.labels is not None:
            return self.labels[v]
        return str(v)

    def node_by_label(self, name: str) -> int:
        if self.labels is not None and name in self.labels:
            return self.labels.index(name)
        try:
            v = int(name)
        except ValueError:
            raise UnknownNodeError(f"unknown node label {name!r}")
        self._check(v)
        return v

    def copy(self) -> "UndirectedGraph":
        g = UndirectedGraph(self.node_count, self.labels)
        for u, v in self.edges():
            g.add_edge(u, v)
        return g

    def is_complete(self, nodes: Iterable[int]) -> bool:
        nodes = list(nodes)
        return all(
            self.has_edge(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1 :]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self.node_count == other.node_count and set(self.edges()) == set(
            other.edges()
        )

    def __repr__(self) -> str:
        return f"UndirectedGraph(n={self.node_count}, m={self.edge_count})"


# ---------------------------------------------------------------------------
# Edge-list text format: one "u v" pair per line, "#" comments, optional
# "node <id> <label>" declarations.  Node count is inferred from the largest
# id mentioned unless a "nodes <n>" line pins it.
# ---------------------------------------------------------------------------


def parse_edge_list(text: str) -> UndirectedGraph:
    labels: dict[int, str] = {}
    edges: list[tuple[int, int, int]] = []  # (line_no, u, v)
    declared_n: Optional[int] = None
    max_id = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "nodes":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("expected 'nodes <count>'", line=line_no)
            declared_n = int(parts[1])
        elif parts[0] == "node":
            if len(parts) != 3 or not parts[1].isdigit():
                raise ParseError("expected 'node <id> <label>'", line=line_no)
            labels[int(parts[1])] = parts[2]
            max_id = max(max_id, int(parts[1]))
        else:
            if len(parts) != 2:
                raise ParseError("expected 'u v' edge pair", line=line_no)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", line=line_no)
            edges.append((line_no, u, v))
            max_id = max(max_id, u, v)
    n = declared_n if declared_n is not None else max_id + 1
    label_list = None
    if labels:
        if set(labels) != set(range(n)):
            raise ParseError("node labels must cover ids 0..n-1 when present")
        label_list = [labels[i] for i in range(n)]
    g = UndirectedGraph(n, label_list)
    for line_no, u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"edge ({u}, {v}) outside node range", line=line_no)
        if u == v:
            raise ParseError("self-loop", line=line_no)
        g.add_edge(u, v)
    return g


def emit_edge_list(g: UndirectedGraph) -> str:
    lines = [f"nodes {g.node_count}"]
    if g.labels is not None:
        for v in range(g.node_count):
            lines.append(f"node {v} {g.labels[v]}")
    for u, v in sorted(g.edges()):
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Maximum cardinality search and chordality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChordalityFailure:
    """Witness that a graph is not chordal.

    ``node`` is a vertex whose earlier neighbours (in MCS visit order) are not
    complete; ``missing_edge`` is a non-adjacent pair among them.
    """

    node: int
    missing_edge: tuple[int, int]

    def describe(self, g: Optional[UndirectedGraph] = None) -> str:
        if g is None:
            return (
                f"node {self.node}: earlier neighbours {self.missing_edge} "
                "are not adjacent"
            )
        u, v = self.missing_edge
        return (
            f"node {g.label(self.node)}: earlier neighbours "
            f"{g.label(u)}, {g.label(v)} are not adjacent"
        )


@dataclass(frozen=True)
class McsResult:
    """Outcome of maximum cardinality search.

    ``order`` is the visit order (first visited first).  When the graph is
    chordal, ``peo`` is the perfect elimination ordering (node eliminated
    first comes first), which is the reverse of ``order``.  Otherwise
    ``failure`` holds a witness and ``peo`` is None.
    """

    order: tuple[int, ...]
    peo: Optional[tuple[int, ...]]
    failure: Optional[ChordalityFailure]

    @property
    def is_chordal(self) -> bool:
        return self.failure is None


def mcs_peo(g: UndirectedGraph) -> McsResult:
    """Run maximum cardinality search; time O(|V| + |E|).

    Ties are broken by the lowest node id so the output is reproducible.
    Returns a perfect elimination ordering when the graph is chordal and a
    :class:`ChordalityFailure` witness otherwise.
    """
    n = g.node_count
    weight = [0] * n
    visited = [False] * n
    buckets: list[set[int]] = [set() for _ in range(n + 1)]
    if n:
        buckets[0] = set(range(n))
    max_w = 0
    order: list[int] = []
    for _ in range(n):
        while not buckets[max_w]:
            max_w -= 1
        v = min(buckets[max_w])
        buckets[max_w].remove(v)
        visited[v] = True
        order.append(v)
        for u in g.neighbors(v):
            if not visited[u]:
                buckets[weight[u]].discard(u)
                weight[u] += 1
                buckets[weight[u]].add(u)
                max_w = max(max_w, weight[u])

    pos = {v: i for i, v in enumerate(order)}
    failure = None
    for v in order:
        earlier = [u for u in g.neighbors(v) if pos[u] < pos[v]]
        if len(earlier) <= 1:
            continue
        parent = max(earlier, key=pos.get)
        parent_adj = g.neighbors(parent)
        for u in earlier:
            if u != parent and u not in parent_adj:
                failure = ChordalityFailure(node=v, missing_edge=(u, parent))
                break
        if failure:
            break
    peo = None if failure else tuple(reversed(order))
    return McsResult(order=tuple(order), peo=peo, failure=failure)


def is_perfect_elimination_ordering(g: UndirectedGraph, peo: Iterable[int]) -> bool:
    """Check that ``peo`` (eliminated-first order) is a valid PEO of ``g``."""
    peo = list(peo)
    if sorted(peo) != list(range(g.node_count)):
        return False
    pos = {v: i for i, v in enumerate(peo)}
    for v in peo:
        later = [u for u in g.neighbors(v) if pos[u] > pos[v]]
        if len(later) <= 1:
            continue
        anchor = min(later, key=pos.get)
        anchor_adj = g.neighbors(anchor)
        for u in later:
            if u != anchor and u not in anchor_adj:
                return False
    return True


# ---------------------------------------------------------------------------
# Maximal cliques, separators, junction forests
# ---------------------------------------------------------------------------


@dataclass
class CliqueSet:
    """Maximal cliques of a chordal graph in perfect (RIP) order, plus the
    separator multiset.

    ``separators[j-1]`` is the intersection of ``cliques[j]`` with the union
    of all earlier cliques, omitting the empty intersections that start new
    connected components; the multiset therefore has exactly
    ``len(cliques) - component_count`` entries.
    """

    cliques: list[NodeSet]
    separators: list[NodeSet]
    component_count: int = 1


def maximal_cliques_chordal(g: UndirectedGraph, peo: Iterable[int]) -> CliqueSet:
    """Extract maximal cliques and the separator multiset along ``peo``.

    The clique order returned is a perfect ordering sequence: each clique's
    intersection with the union of its predecessors lies inside a single
    earlier clique.
    """
    peo = list(peo)
    if not is_perfect_elimination_ordering(g, peo):
        raise InvalidPeoError("ordering fails the perfect elimination check")
    order = list(reversed(peo))  # MCS-style visit order
    pos = {v: i for i, v in enumerate(order)}
    candidates: list[NodeSet] = []
    for v in order:
        earlier = {u for u in g.neighbors(v) if pos[u] < pos[v]}
        candidates.append(frozenset(earlier | {v}))
    # Keep candidates not contained in another candidate; completion order of
    # the surviving cliques is a perfect ordering sequence.
    cliques: list[NodeSet] = []
    for i, c in enumerate(candidates):
        dominated = any(c < d for d in candidates if d != c)
        duplicate = any(c == d for d in cliques)
        if not dominated and not duplicate:
            cliques.append(c)
    separators: list[NodeSet] = []
    seen: set[int] = set()
    components = 0
    for c in cliques:
        inter = frozenset(c & seen)
        if inter:
            separators.append(inter)
        else:
            components += 1
        seen |= c
    return CliqueSet(cliques=cliques, separators=separators, component_count=components)


@dataclass
class JunctionTreeClassic:
    """A junction forest over maximal cliques.

    ``tree_edges`` pairs clique indices and carries the separator (the two
    cliques' intersection).  Edges form a forest and satisfy the running
    intersection property for chordal inputs.
    """

    clique_nodes: list[NodeSet]
    tree_edges: list[tuple[int, int, NodeSet]] = field(default_factory=list)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(len(self.clique_nodes))}
        for i, j, _ in self.tree_edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def build_junction_tree(cs: CliqueSet) -> JunctionTreeClassic:
    """Build a junction forest by attaching each clique along the perfect
    ordering sequence.

    Clique ``j`` attaches to the latest earlier clique that contains its
    separator ``S_j``; an empty separator starts a new component.  The result
    is a maximum-weight spanning forest of the clique-intersection graph and
    satisfies RIP.
    """
    edges: list[tuple[int, int, NodeSet]] = []
    seen: set[int] = set()
    for j, c in enumerate(cs.cliques):
        sep = frozenset(c & seen)
        if sep:
            k = max(
                i for i in range(j) if sep <= cs.cliques[i]
            )  # guaranteed by RIP of the ordering
            edges.append((k, j, sep))
        seen |= c
    return JunctionTreeClassic(clique_nodes=list(cs.cliques), tree_edges=edges)


def verify_rip(
    jt: JunctionTreeClassic,
) -> tuple[bool, Optional[tuple[int, int, int]]]:
    """Check the running intersection property within each forest component.

    Returns ``(True, None)`` or ``(False, (a, b, k))`` where cliques ``a`` and
    ``b`` share members not contained in clique ``k`` on the path between
    them.
    """
    adj = jt.adjacency()
    n = len(jt.clique_nodes)

    def path(a: int, b: int) -> Optional[list[int]]:
        prev = {a: a}
        queue = [a]
        while queue:
            x = queue.pop()
            if x == b:
                break
            for y in adj[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        if b not in prev:
            return None
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out

    for a in range(n):
        for b in range(a + 1, n):
            inter = jt.clique_nodes[a] & jt.clique_nodes[b]
            if not inter:
                continue
            p = path(a, b)
            if p is None:
                continue  # different components: out of scope here
            for k in p:
                if not inter <= jt.clique_nodes[k]:
                    return False, (a, b, k)
    return True, None


def factorization_terms(cs: CliqueSet) -> tuple[list[NodeSet], list[NodeSet]]:
    """Numerator (clique) and denominator (separator) index multisets of the
    likelihood factorization."""
    return list(cs.cliques), list(cs.separators)


def fold_log_potential(
    cs: CliqueSet, log_potential: Callable[[NodeSet], float]
) -> float:
    """Fold a caller-supplied log-potential over the factorization terms:
    sum over cliques minus sum over separators."""
    num, den = factorization_terms(cs)
    return sum(log_potential(c) for c in num) - sum(log_potential(s) for s in den)
