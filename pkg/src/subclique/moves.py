"""The move calculus on clique-dependent bipartite states.

Boundary and neighbour set computation (tree-conditioned and tree-free),
separator sets, sub-clique promotion, and the connect/disconnect edits that
keep the junction graph consistent.  Every edit is journalled as a
:class:`TreeEdit` whose primitives record their own inverses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from .errors import (
    ImpermissibleMoveError,
    InvalidPromotionError,
    NotDecomposableError,
)
from .graphs import maximal_cliques_chordal, mcs_peo
from .state import RepresentationState, induced_subtree

# ---------------------------------------------------------------------------
# Move sets (boundary and neighbour clique-nodes of a graph node)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoveSets:
    """Per-node move sets.

    * ``bd_max`` -- maximal clique-nodes the node may disconnect from:
      members containing the node that are leaves (degree <= 1) of its
      induced clique subtree.
    * ``bd_sub`` -- all sub-cliques containing the node.
    * ``nei_max`` -- maximal connect targets: clique-nodes junction-adjacent
      to the induced subtree, plus one representative (lowest id) per
      junction-forest component disjoint from it.
    * ``nei_sub`` -- sub-clique connect targets; ``nei_sub_safe`` holds the
      ones with a parent containing the node (simultaneous-safe), and
      ``nei_sub_constrained`` the ones admitted by the separator-containment
      condition on their parents.
    """

    node: int
    bd_max: frozenset[int]
    bd_sub: frozenset[int]
    nei_max: frozenset[int]
    nei_sub: frozenset[int]
    foreign_reps: frozenset[int]
    nei_sub_safe: frozenset[int]
    nei_sub_constrained: frozenset[int]

    @property
    def boundary(self) -> frozenset[int]:
        return self.bd_max | self.bd_sub

    @property
    def neighbours(self) -> frozenset[int]:
        return self.nei_max | self.nei_sub


def move_sets(state: RepresentationState, i: int) -> MoveSets:
    """Compute the four move sets of node ``i`` on the current junction
    graph."""
    z, t = state.z, state.t
    sub = induced_subtree(state, i)
    home = sub.maximal_vertices
    bd_max = frozenset(s for s in home if sub.maximal_degree(s) <= 1)
    bd_sub = sub.sub_vertices
    reach = set().union(*(z.members[q] for q in home)) if home else {i}

    adjacent_max: set[int] = set()
    for q in home:
        for c in t.junction_neighbors(q):
            if i not in z.members[c]:
                adjacent_max.add(c)
    reps: set[int] = set()
    for comp in t.maximal_components():
        if not comp & home:
            reps.add(min(comp))
    nei_max = frozenset(adjacent_max | reps)

    safe: set[int] = set()
    constrained: set[int] = set()
    for x in state.sub_ids():
        mx = z.members[x]
        if i in mx:
            continue
        parents = t.parents(x)
        if not parents:
            continue
        if any(i in z.members[p] for p in parents):
            safe.add(x)
        elif any(p in adjacent_max for p in parents) and all(
            (z.members[p] & reach) <= mx for p in parents
        ):
            constrained.add(x)
    return MoveSets(
        node=i,
        bd_max=bd_max,
        bd_sub=frozenset(bd_sub),
        nei_max=nei_max,
        nei_sub=frozenset(safe | constrained),
        foreign_reps=frozenset(reps),
        nei_sub_safe=frozenset(safe),
        nei_sub_constrained=frozenset(constrained),
    )


def move_sets_tree_free(state: RepresentationState, i: int) -> MoveSets:
    """Move sets from membership algebra alone (no junction-tree
    conditioning of the boundary).

    The boundary condition admits a maximal clique-node when each of the
    graph separators inside it that contain the node is covered by some
    other clique-node; the neighbour conditions bound each candidate's
    overlap with other maximal cliques by a clique of the node's subtree.
    This is reported as-is: it is not always equal to :func:`move_sets`
    (see :func:`tree_free_report`).
    """
    z, t = state.z, state.t
    graph = state.project()
    res = mcs_peo(graph)
    if not res.is_chordal:
        raise NotDecomposableError(res.failure.describe(graph))
    cs = maximal_cliques_chordal(graph, res.peo)
    distinct_seps = {frozenset(s) for s in cs.separators}

    sub = induced_subtree(state, i)
    home = sub.maximal_vertices
    live = state.live()
    maximal = [c for c in live if c in t.maximal]
    subs = [c for c in live if c not in t.maximal]

    bd_max: set[int] = set()
    for s in maximal:
        if i not in z.members[s]:
            continue
        seps = {
            sep for sep in distinct_seps if i in sep and sep <= z.members[s]
        }
        if all(
            any(k != s and sep <= z.members[k] for k in live) for sep in seps
        ):
            bd_max.add(s)

    bd_sub = {x for x in subs if i in z.members[x]}

    union_maximal: dict[int, frozenset[int]] = {}
    all_max_members = [z.members_of(c) for c in maximal]
    nei_max: set[int] = set()
    for s in maximal:
        if i in z.members[s]:
            continue
        overlap = frozenset().union(
            *(m for c, m in zip(maximal, all_max_members) if c != s)
        ) & z.members_of(s) if len(maximal) > 1 else frozenset()
        if any(overlap <= z.members[k] for k in home):
            nei_max.add(s)

    everything = frozenset().union(*all_max_members) if all_max_members else frozenset()
    nei_sub: set[int] = set()
    for x in subs:
        if i in z.members[x]:
            continue
        overlap = z.members_of(x) & everything
        if any(overlap <= z.members[k] for k in home):
            nei_sub.add(x)

    return MoveSets(
        node=i,
        bd_max=frozenset(bd_max),
        bd_sub=frozenset(bd_sub),
        nei_max=frozenset(nei_max),
        nei_sub=frozenset(nei_sub),
        foreign_reps=frozenset(),
        nei_sub_safe=frozenset(),
        nei_sub_constrained=frozenset(),
    )


def tree_free_report(state: RepresentationState) -> dict:
    """Differential report between the tree-conditioned and tree-free move
    sets for every node.  Discrepancies are listed, not asserted away."""

    def describe(cids: Iterable[int]) -> list[dict]:
        return [
            {"id": c, "label": state.clique_label(c)} for c in sorted(cids)
        ]

    rows = []
    discrepancies = 0
    for i in range(state.node_count):
        tree = move_sets(state, i)
        free = move_sets_tree_free(state, i)
        sets = {}
        for name in ("bd_max", "bd_sub", "nei_max", "nei_sub"):
            a, b = getattr(tree, name), getattr(free, name)
            agree = a == b
            if not agree:
                discrepancies += 1
            sets[name] = {
                "tree": describe(a),
                "tree_free": describe(b),
                "only_tree": describe(a - b),
                "only_tree_free": describe(b - a),
                "agree": agree,
            }
        rows.append({"node": state.node_label(i), "sets": sets})
    return {"nodes": rows, "discrepancy_count": discrepancies}


# ---------------------------------------------------------------------------
# Separators and promotion
# ---------------------------------------------------------------------------


def separators_containing(
    state: RepresentationState, s: int, i: int
) -> frozenset[frozenset[int]]:
    """Separators of the maximal clique-node ``s`` along the node's induced
    clique subtree: intersections with its maximal T-neighbours containing
    ``i``.  Returns {empty set} when there is no such neighbour."""
    z, t = state.z, state.t
    if s not in t.maximal:
        raise ValueError(f"clique-node {s} is not maximal")
    if i not in z.members_of(s):
        raise ValueError(f"node {state.node_label(i)} is not a member of clique-node {s}")
    nbrs = [x for x in t.junction_neighbors(s) if i in z.members[x]]
    if not nbrs:
        return frozenset({frozenset()})
    return frozenset(frozenset(z.members[s] & z.members[x]) for x in nbrs)


def promotion_candidates(
    state: RepresentationState, s: int, i: int
) -> frozenset[int]:
    """Sub-cliques eligible to become maximal when ``i`` disconnects from
    the maximal clique-node ``s``: adjacent sub-cliques containing ``i``
    that cover every separator and have degree 1 in T.

    A candidate nested in another maximal clique of the node's subtree is
    excluded: it could not be maximal after the disconnect."""
    z, t = state.z, state.t
    seps = separators_containing(state, s, i)
    others = [
        q for q in induced_subtree(state, i).maximal_vertices if q != s
    ]
    out = set()
    for x in t.neighbors(s):
        if x in t.maximal or i not in z.members[x]:
            continue
        if len(t.neighbors(x)) != 1:
            continue
        if not all(sep <= z.members[x] for sep in seps):
            continue
        if any(z.members[x] <= z.members[q] for q in others):
            continue
        out.add(x)
    return frozenset(out)


WeightFn = Callable[[RepresentationState, int, int], float]


def choose_promotion(
    state: RepresentationState,
    s: int,
    i: int,
    weight: Optional[WeightFn] = None,
) -> Optional[int]:
    """Pick the promotion with the largest weight; ties broken by larger
    membership, then lower id.  None when no candidate exists."""
    cands = promotion_candidates(state, s, i)
    if not cands:
        return None
    if weight is None:
        weight = lambda _state, _cid, _node: 0.0
    return max(
        sorted(cands),
        key=lambda c: (weight(state, c, i), len(state.z.members[c]), -c),
    )


# ---------------------------------------------------------------------------
# Edit journal
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetBit:
    cid: int
    node: int


@dataclass(frozen=True)
class ClearBit:
    cid: int
    node: int


@dataclass(frozen=True)
class AddEdge:
    a: int
    b: int


@dataclass(frozen=True)
class RemoveEdge:
    a: int
    b: int


@dataclass(frozen=True)
class SetMaximal:
    cid: int


@dataclass(frozen=True)
class ClearMaximal:
    cid: int


@dataclass(frozen=True)
class CreateNode:
    cid: int
    generation: int
    members: tuple[int, ...]
    maximal: bool


@dataclass(frozen=True)
class RetireNode:
    cid: int
    generation: int
    members: tuple[int, ...]
    maximal: bool


Primitive = Union[
    SetBit, ClearBit, AddEdge, RemoveEdge, SetMaximal, ClearMaximal,
    CreateNode, RetireNode,
]

_INVERSES = {
    SetBit: lambda op: ClearBit(op.cid, op.node),
    ClearBit: lambda op: SetBit(op.cid, op.node),
    AddEdge: lambda op: RemoveEdge(op.a, op.b),
    RemoveEdge: lambda op: AddEdge(op.a, op.b),
    SetMaximal: lambda op: ClearMaximal(op.cid),
    ClearMaximal: lambda op: SetMaximal(op.cid),
    CreateNode: lambda op: RetireNode(op.cid, op.generation, op.members, op.maximal),
    RetireNode: lambda op: CreateNode(op.cid, op.generation, op.members, op.maximal),
}


def apply_primitive(state: RepresentationState, op: Primitive) -> None:
    z, t = state.z, state.t
    if isinstance(op, SetBit):
        z.set_bit(op.cid, op.node)
    elif isinstance(op, ClearBit):
        z.clear_bit(op.cid, op.node)
    elif isinstance(op, AddEdge):
        t.add_edge(op.a, op.b)
    elif isinstance(op, RemoveEdge):
        t.remove_edge(op.a, op.b)
    elif isinstance(op, SetMaximal):
        t.set_maximal(op.cid)
    elif isinstance(op, ClearMaximal):
        t.clear_maximal(op.cid)
    elif isinstance(op, CreateNode):
        z.install(op.cid, op.generation, op.members)
        t.add_vertex(op.cid)
        if op.maximal:
            t.set_maximal(op.cid)
    elif isinstance(op, RetireNode):
        t.remove_vertex(op.cid)
        z.retire(op.cid)
    else:
        raise TypeError(f"unknown primitive {op!r}")


@dataclass
class TreeEdit:
    """Ordered list of primitive edits; replayable and invertible."""

    ops: list[Primitive] = field(default_factory=list)

    def apply_to(self, state: RepresentationState) -> None:
        for op in self.ops:
            apply_primitive(state, op)

    def inverse(self) -> "TreeEdit":
        return TreeEdit([_INVERSES[type(op)](op) for op in reversed(self.ops)])

    def describe(self, state: Optional[RepresentationState] = None) -> list[str]:
        out = []
        for op in self.ops:
            out.append(f"{type(op).__name__} {op}")
        return out


class _Recorder:
    """Applies primitives to a state while journalling them."""

    def __init__(self, state: RepresentationState):
        self.state = state
        self.ops: list[Primitive] = []

    def _do(self, op: Primitive) -> None:
        apply_primitive(self.state, op)
        self.ops.append(op)

    def set_bit(self, cid, node):
        self._do(SetBit(cid, node))

    def clear_bit(self, cid, node):
        self._do(ClearBit(cid, node))

    def add_edge(self, a, b):
        if not self.state.t.has_edge(a, b):
            self._do(AddEdge(a, b))

    def remove_edge(self, a, b):
        if self.state.t.has_edge(a, b):
            self._do(RemoveEdge(a, b))

    def rewire_edge(self, keep, frm, to):
        """Move the edge (keep, frm) to (keep, to), dropping self-loops and
        duplicates."""
        self.remove_edge(keep, frm)
        if to != keep:
            self.add_edge(keep, to)

    def set_maximal(self, cid):
        if cid not in self.state.t.maximal:
            self._do(SetMaximal(cid))

    def clear_maximal(self, cid):
        if cid in self.state.t.maximal:
            self._do(ClearMaximal(cid))

    def create(self, members, maximal):
        cid = self.state.z.allocate(members)
        self.state.t.add_vertex(cid)
        if maximal:
            self.state.t.set_maximal(cid)
        self.ops.append(
            CreateNode(
                cid,
                self.state.z.generation[cid],
                tuple(sorted(members)),
                maximal,
            )
        )
        return cid

    def retire(self, cid):
        for y in sorted(self.state.t.neighbors(cid)):
            self.remove_edge(cid, y)
        payload = RetireNode(
            cid,
            self.state.z.generation[cid],
            tuple(sorted(self.state.z.members[cid])),
            cid in self.state.t.maximal,
        )
        self._do(payload)

    def edit(self) -> TreeEdit:
        return TreeEdit(self.ops)


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    kind: str  # "connect" or "disconnect"
    node: int
    target: int
    promotion: Optional[int] = None

    def describe(self, state: RepresentationState) -> str:
        text = (
            f"{self.kind} {state.node_label(self.node)} "
            f"{state.clique_label(self.target)}(#{self.target})"
        )
        if self.promotion is not None:
            text += f" promoting {state.clique_label(self.promotion)}(#{self.promotion})"
        return text


def apply_move(state: RepresentationState, move: Move) -> TreeEdit:
    if move.kind == "connect":
        return apply_connect(state, move.node, move.target)
    if move.kind == "disconnect":
        return apply_disconnect(state, move.node, move.target, move.promotion)
    raise ValueError(f"unknown move kind {move.kind!r}")


def apply_connect(state: RepresentationState, i: int, s: int) -> TreeEdit:
    """Connect node ``i`` to the clique-node ``s``.

    A sub-clique target with a parent containing the node stays nested: the
    node joins it and edges to clique-nodes not containing the node are
    pruned.  Any other target grows into a maximal clique: dominated
    clique-nodes of the node's subtree are demoted onto it, the junction
    tree is rerouted through it, extra parent edges are cut down to one, and
    nesting sub-cliques of the old parents are attached.
    """
    z, t = state.z, state.t
    ms = move_sets(state, i)
    if s not in ms.neighbours:
        raise ImpermissibleMoveError(_connect_refusal(state, ms, i, s))
    rec = _Recorder(state)

    sub = induced_subtree(state, i)
    home = sorted(sub.maximal_vertices)
    new_members = z.members_of(s) | {i}
    hosts_over = [q for q in home if new_members <= z.members_of(q)]
    if s in ms.nei_sub_safe or hosts_over:
        # The grown target stays nested inside a maximal clique containing
        # the node; prune edges to clique-nodes that no longer contain it.
        rec.set_bit(s, i)
        for x in sorted(t.neighbors(s)):
            if i not in z.members[x]:
                rec.remove_edge(s, x)
        if not t.neighbors(s):
            rec.add_edge(s, hosts_over[0])
        return rec.edit()

    reach = set().union(*(z.members[q] for q in home)) if home else set()
    was_sub = s not in t.maximal
    old_parents = sorted(t.parents(s)) if was_sub else []
    pre_members = z.members_of(s)

    rec.set_bit(s, i)
    rec.set_maximal(s)

    # demote clique-nodes now dominated by the grown target
    demoted = [x for x in home if z.members_of(x) <= new_members]
    demoted += [
        p for p in old_parents if z.members_of(p) <= new_members and p not in demoted
    ]
    for x in demoted:
        rec.clear_maximal(x)
        for y in sorted(t.neighbors(x)):
            if y != s:
                rec.rewire_edge(y, x, s)
        rec.add_edge(x, s)

    live_home = [q for q in home if q not in demoted]

    # reroute the junction tree through the grown target
    anchors = old_parents if was_sub else [
        c for c in sorted(t.junction_neighbors(s)) if c not in demoted and c != s
    ]
    if live_home:
        crossing = [
            (q, p)
            for q in live_home
            for p in anchors
            if p not in demoted and t.has_edge(q, p)
        ]
        attached = any(t.has_edge(q, s) for q in live_home)
        if crossing and was_sub:
            for q, p in crossing:
                rec.remove_edge(q, p)
        if not attached or (crossing and was_sub):
            gate = pre_members & reach
            hosts = [q for q in live_home if gate <= z.members_of(q)]
            rec.add_edge(hosts[0], s)

    if was_sub:
        # keep one edge to the old parents besides the new junction edge
        keep = [p for p in old_parents if p not in demoted]
        for p in keep[1:]:
            rec.remove_edge(s, p)
        sweep = keep
    else:
        sweep = [p for p in anchors if p not in demoted]
    # attach nesting sub-cliques hanging off the old parents / neighbours
    for p in sweep:
        for x in sorted(t.neighbors(p)):
            if x != s and x not in t.maximal and z.members_of(x) <= new_members:
                rec.add_edge(x, s)
    return rec.edit()


def _connect_refusal(state, ms: MoveSets, i: int, s: int) -> str:
    label = state.node_label(i)
    if not state.z.is_live(s):
        return f"clique-node {s} is not live"
    if i in state.z.members_of(s):
        return f"node {label} is already a member of clique-node #{s}"
    if s in state.t.maximal:
        return (
            f"clique-node #{s} is neither junction-adjacent to the induced "
            f"subtree of {label} nor a foreign-component representative"
        )
    return (
        f"sub-clique #{s} fails the neighbour conditions for {label}: no parent "
        "contains the node and the parent separators are not covered"
    )


def apply_disconnect(
    state: RepresentationState,
    i: int,
    s: int,
    promotion: Optional[int] = None,
) -> TreeEdit:
    """Disconnect node ``i`` from the clique-node ``s``.

    Sub-clique case: the bit is cleared and an emptied sub-clique is
    retired.  Maximal case: an optional promotion makes a qualifying
    sub-clique maximal first (keeping its edge when larger than a
    singleton, rewiring nested sibling sub-cliques onto it and discarding
    the rest, and rerouting the junction edges whose separators contain the
    node); afterwards, if the shrunken clique-node is dominated by a
    junction neighbour it is demoted and its edges rewired there.  A node
    left uncovered receives a fresh singleton maximal clique-node.
    """
    z, t = state.z, state.t
    ms = move_sets(state, i)
    if s not in ms.boundary:
        raise ImpermissibleMoveError(_disconnect_refusal(state, ms, i, s))

    if s in ms.bd_sub:
        if promotion is not None:
            raise InvalidPromotionError(
                "promotion only applies when disconnecting from a maximal clique"
            )
        rec = _Recorder(state)
        rec.clear_bit(s, i)
        if not z.members[s]:
            rec.retire(s)
        return rec.edit()

    cands = promotion_candidates(state, s, i)
    if promotion is not None and promotion not in cands:
        raise InvalidPromotionError(
            f"clique-node #{promotion} is not a promotion candidate of "
            f"({state.clique_label(s)}, {state.node_label(i)})"
        )

    rec = _Recorder(state)
    i_subs = sorted(
        x for x in t.neighbors(s) if x not in t.maximal and i in z.members[x]
    )
    routed = sorted(q for q in t.junction_neighbors(s) if i in z.members[q])

    if promotion is not None:
        o = promotion
        rec.set_maximal(o)
        if len(z.members[o]) == 1:
            rec.remove_edge(o, s)
        for x in i_subs:
            if x == o:
                continue
            if z.members_of(x) <= z.members_of(o):
                rec.rewire_edge(x, s, o)
            else:
                rec.retire(x)
        for q in routed:
            rec.rewire_edge(q, s, o)
        rec.clear_bit(s, i)
    else:
        rec.clear_bit(s, i)
        for x in i_subs:
            rec.remove_edge(x, s)
            if not t.neighbors(x):
                hosts = [
                    m
                    for m in sorted(t.maximal)
                    if m != x and z.members_of(x) <= z.members_of(m)
                ]
                if hosts:
                    rec.add_edge(x, hosts[0])
                else:
                    rec.retire(x)

    if not z.members[s]:
        rec.clear_maximal(s)
        rec.retire(s)
    else:
        dominators = [
            x
            for x in sorted(t.junction_neighbors(s))
            if z.members_of(s) <= z.members_of(x)
        ]
        if dominators:
            x0 = dominators[0]
            rec.clear_maximal(s)
            for y in sorted(t.neighbors(s)):
                if y != x0:
                    rec.rewire_edge(y, s, x0)
            rec.add_edge(s, x0)

    if not z.node_cliques[i]:
        rec.create({i}, maximal=True)
    return rec.edit()


def _disconnect_refusal(state, ms: MoveSets, i: int, s: int) -> str:
    label = state.node_label(i)
    if not state.z.is_live(s):
        return f"clique-node {s} is not live"
    if i not in state.z.members_of(s):
        return f"node {label} is not a member of clique-node #{s}"
    return (
        f"target #{s} ({state.clique_label(s)}) is not a leaf of the induced "
        f"clique subtree of {label}"
    )


def all_moves(
    state: RepresentationState, include_promotions: bool = True
) -> list[Move]:
    """Every permissible single move, with each promotion choice (including
    no promotion) listed separately when requested."""
    out: list[Move] = []
    for i in range(state.node_count):
        ms = move_sets(state, i)
        for s in sorted(ms.bd_sub):
            out.append(Move("disconnect", i, s))
        for s in sorted(ms.bd_max):
            out.append(Move("disconnect", i, s))
            if include_promotions:
                for o in sorted(promotion_candidates(state, s, i)):
                    out.append(Move("disconnect", i, s, promotion=o))
        for c in sorted(ms.neighbours):
            out.append(Move("connect", i, c))
    return out


# ---------------------------------------------------------------------------
# Disconnect table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    node: int
    clique: int
    separators: frozenset[frozenset[int]]
    candidates: frozenset[int]


def disconnect_table(state: RepresentationState) -> list[TableRow]:
    """One row per (node, maximal clique-node membership) pair with the
    separator set and promotion candidates, sorted by node label then
    clique label."""
    rows = []
    nodes = sorted(range(state.node_count), key=state.node_label)
    for i in nodes:
        holders = sorted(
            (c for c in state.z.cliques_of(i) if c in state.t.maximal),
            key=lambda c: (state.clique_label(c), c),
        )
        for s in holders:
            rows.append(
                TableRow(
                    node=i,
                    clique=s,
                    separators=separators_containing(state, s, i),
                    candidates=promotion_candidates(state, s, i),
                )
            )
    return rows


def format_disconnect_table(state: RepresentationState, rows=None) -> str:
    """Aligned text rendering; the empty separator renders as ``-`` and an
    empty candidate set as ``{}``."""
    if rows is None:
        rows = disconnect_table(state)
    rendered = []
    for row in rows:
        seps = sorted(state.render_members(sep) for sep in row.separators)
        cands = sorted(state.clique_label(c) for c in row.candidates)
        rendered.append(
            (
                state.node_label(row.node),
                state.clique_label(row.clique),
                "{" + ", ".join(seps) + "}",
                "{" + ", ".join(cands) + "}",
            )
        )
    header = ("node", "clique", "separators", "candidates")
    widths = [
        max(len(header[k]), *(len(r[k]) for r in rendered)) if rendered else len(header[k])
        for k in range(4)
    ]
    lines = ["  ".join(header[k].ljust(widths[k]) for k in range(4)).rstrip()]
    for r in rendered:
        lines.append("  ".join(r[k].ljust(widths[k]) for k in range(4)).rstrip())
    return "\n".join(lines) + "\n"
