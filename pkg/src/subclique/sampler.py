"""Node-driven MCMC over clique-dependent bipartite states.

One step picks a graph node uniformly, draws a single connect/disconnect
(or a hold) from the node's proposal menu, and accepts with a
Metropolis-Hastings ratio.  The reverse-proposal probability is computed on
the post-state for the same node, summing the menu mass of every single that
maps back to the pre-state (states compared canonically, up to clique-node id
renaming); each per-node kernel is therefore reversible, and so is their
mixture.

Randomness is counter-based: every (seed, step, substream) triple keys its
own Philox generator, so batched and sequential execution see identical
draws and a checkpoint needs only the seed and the step counter.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ParseError
from .moves import (
    Move,
    apply_move,
    choose_promotion,
    move_sets,
)
from .state import (
    RepresentationState,
    induced_subtree,
    restore,
    snapshot,
    verify_clique_dependent,
)
from .graphs import mcs_peo

AffinityModel = Callable[[RepresentationState, int, int], float]
TargetModel = Callable[[RepresentationState], float]


# ---------------------------------------------------------------------------
# Affinity models f(clique-node, node) -> [0, 1]
# ---------------------------------------------------------------------------


def constant_affinity(p: float) -> AffinityModel:
    if not 0.0 <= p <= 1.0:
        raise ValueError("constant affinity must lie in [0, 1]")

    def f(_state, _cid, _node):
        return p

    return f


def size_affinity(a: float, b: float) -> AffinityModel:
    """Logistic affinity in the clique-node's membership size."""

    def f(state, cid, _node):
        x = a * len(state.z.members[cid]) + b
        return 1.0 / (1.0 + math.exp(-x))

    return f


def make_affinity(spec: str) -> AffinityModel:
    """Parse ``const:<p>`` or ``size:<a>,<b>``."""
    name, _, arg = spec.partition(":")
    if name == "const":
        return constant_affinity(float(arg or 0.5))
    if name == "size":
        parts = [float(x) for x in arg.split(",")] if arg else [1.0, 0.0]
        if len(parts) != 2:
            raise ValueError("size affinity takes two parameters a,b")
        return size_affinity(*parts)
    raise ValueError(f"unknown affinity model {name!r}")


# ---------------------------------------------------------------------------
# Conditionals and path joints
# ---------------------------------------------------------------------------


def conditional_prob(
    state: RepresentationState, k: int, i: int, f: AffinityModel
) -> float:
    """Probability that the (k, i) incidence bit is set at the next update:
    the affinity when k is in the node's boundary or neighbour sets, else
    the frozen current bit."""
    ms = move_sets(state, i)
    if k in ms.boundary or k in ms.neighbours:
        return f(state, k, i)
    return 1.0 if i in state.z.members_of(k) else 0.0


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def path_joint_log(state: RepresentationState, i: int, f: AffinityModel) -> float:
    """Log of the connection-path joint: the product of affinities over the
    node's induced subtree times (1 - affinity) over its neighbour set."""
    sub = induced_subtree(state, i)
    ms = move_sets(state, i)
    total = 0.0
    for x in sub.vertices:
        total += _log(f(state, x, i))
    for x in ms.neighbours:
        total += _log(1.0 - f(state, x, i))
    return total


def path_joint_log_indicator(
    state: RepresentationState, i: int, f: AffinityModel
) -> float:
    """The same joint in exponent form: a product over every clique-node of
    f^z * (1-f)^((1-z) * neighbour indicator)."""
    ms = move_sets(state, i)
    total = 0.0
    for k in state.live():
        z_ki = 1 if i in state.z.members[k] else 0
        delta = 1 if k in ms.neighbours else 0
        if z_ki:
            total += _log(f(state, k, i))
        elif delta:
            total += _log(1.0 - f(state, k, i))
    return total


def path_joint(state: RepresentationState, i: int, f: AffinityModel) -> float:
    return math.exp(path_joint_log(state, i, f))


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


def uniform_target(_state: RepresentationState) -> float:
    return 0.0


def path_joint_target(f: AffinityModel, edge_penalty: float = 0.0) -> TargetModel:
    """Product of per-node path joints, optionally penalized by edge count."""

    def logpdf(state: RepresentationState) -> float:
        total = sum(path_joint_log(state, i, f) for i in range(state.node_count))
        if edge_penalty:
            total -= edge_penalty * state.project().edge_count
        return total

    return logpdf


def make_target(spec: str, f: AffinityModel) -> TargetModel:
    name, _, arg = spec.partition(":")
    if name == "uniform":
        return uniform_target
    if name == "pathjoint":
        penalty = float(arg) if arg else 0.0
        return path_joint_target(f, penalty)
    raise ValueError(f"unknown target {name!r}")


# ---------------------------------------------------------------------------
# Proposal menus
# ---------------------------------------------------------------------------


def subset_proposal_mass(n_nodes: int, m: int, m_total: int) -> float:
    """Mass of one m-subset of the constrained set M:
    m! (|M|-m)! / (|Theta| |M|!)."""
    return (
        math.factorial(m)
        * math.factorial(m_total - m)
        / (n_nodes * math.factorial(m_total))
    )


@dataclass(frozen=True)
class ProposalMove:
    move: Move
    weight: float
    category: str  # "safe" | "constrained" | "free"


@dataclass
class ProposalSpec:
    """A node's single-move menu.

    ``singles`` carry probabilities conditional on the node having been
    picked; together with ``hold_weight`` they sum to one.  ``constrained``
    is the set M of boundary cliques that conflict with connect targets;
    ``subset_masses`` reports the (subset size, per-subset mass) table for
    the constrained family.
    """

    node: int
    singles: list[ProposalMove]
    hold_weight: float
    constrained: frozenset[int]
    subset_masses: list[tuple[int, float]]

    def total_mass(self) -> float:
        return sum(pm.weight for pm in self.singles) + self.hold_weight


def enumerate_proposals(
    state: RepresentationState,
    i: int,
    promotion_weight: Optional[AffinityModel] = None,
) -> ProposalSpec:
    """Build node ``i``'s proposal menu.

    Simultaneous-safe moves are disconnects from sub-cliques and connects to
    sub-cliques below a clique containing the node.  The constrained family
    couples disconnects from boundary cliques M (those junction-adjacent to
    a connect target) with the connect targets themselves; everything else
    is free.  Each single (and an explicit hold) receives equal conditional
    mass, so the menu is a proper distribution.
    """
    z, t = state.z, state.t
    ms = move_sets(state, i)
    connect_constrained = sorted(
        (ms.nei_max - ms.foreign_reps) | ms.nei_sub_constrained
    )
    m_set = frozenset(
        s
        for s in ms.bd_max
        if any(t.has_edge(s, c) for c in connect_constrained)
    )
    singles: list[ProposalMove] = []

    def add(move: Move, category: str) -> None:
        singles.append(ProposalMove(move=move, weight=0.0, category=category))

    for s in sorted(ms.bd_sub):
        add(Move("disconnect", i, s), "safe")
    for x in sorted(ms.nei_sub_safe):
        add(Move("connect", i, x), "safe")
    for s in sorted(ms.bd_max):
        promo = choose_promotion(state, s, i, promotion_weight)
        add(
            Move("disconnect", i, s, promotion=promo),
            "constrained" if s in m_set else "free",
        )
    for c in connect_constrained:
        add(Move("connect", i, c), "constrained")
    for c in sorted(ms.foreign_reps):
        add(Move("connect", i, c), "free")

    k = len(singles)
    w = 1.0 / (k + 1)
    singles = [ProposalMove(pm.move, w, pm.category) for pm in singles]
    masses = [
        (m, subset_proposal_mass(max(state.node_count, 1), m, len(m_set)))
        for m in range(len(m_set) + 1)
    ]
    return ProposalSpec(
        node=i,
        singles=singles,
        hold_weight=w,
        constrained=m_set,
        subset_masses=masses,
    )


# ---------------------------------------------------------------------------
# Chain state and the MH step
# ---------------------------------------------------------------------------


@dataclass
class StepRecord:
    step: int
    node: int
    kind: str  # "connect" | "disconnect" | "hold"
    accepted: bool
    edge_count: int
    maximal_count: int
    max_clique_size: int

    def as_tsv(self, state: RepresentationState) -> str:
        return "\t".join(
            [
                str(self.step),
                state.node_label(self.node) if self.node >= 0 else "-",
                self.kind,
                "1" if self.accepted else "0",
                str(self.edge_count),
                str(self.maximal_count),
                str(self.max_clique_size),
            ]
        )


TRACE_HEADER = "step\tnode\tkind\taccepted\tedges\tmaximal\tmax_clique"


class ChainState:
    """Sampler state: representation, counter-based RNG key, trace ring."""

    def __init__(
        self,
        state: RepresentationState,
        seed: int,
        step_count: int = 0,
        trace_cap: int = 1_000_000,
    ):
        self.state = state
        self.seed = int(seed)
        self.step_count = int(step_count)
        self.trace: deque[StepRecord] = deque(maxlen=trace_cap)

    def rng(self, step: int, lane: int = 0) -> np.random.Generator:
        key = (self.seed & 0xFFFFFFFFFFFFFFFF, ((step << 12) | lane) & 0xFFFFFFFFFFFFFFFF)
        return np.random.Generator(np.random.Philox(key=key))

    def summary_of(self, state: Optional[RepresentationState] = None) -> tuple[int, int, int]:
        state = state or self.state
        edges = state.project().edge_count
        sizes = [len(state.z.members[c]) for c in state.t.maximal]
        return edges, len(state.t.maximal), max(sizes) if sizes else 0

    def checkpoint(self) -> str:
        return (
            f"subclique-chain 1\nseed {self.seed}\nstep {self.step_count}\n---\n"
            + snapshot(self.state)
        )


def restore_chain(text: str, trace_cap: int = 1_000_000) -> ChainState:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "subclique-chain 1":
        raise ParseError("missing 'subclique-chain 1' header", line=1)
    seed = step = None
    body_at = None
    for idx, line in enumerate(lines[1:], start=1):
        if line.strip() == "---":
            body_at = idx + 1
            break
        kind, _, value = line.partition(" ")
        if kind == "seed":
            seed = int(value)
        elif kind == "step":
            step = int(value)
    if seed is None or step is None or body_at is None:
        raise ParseError("checkpoint must declare seed, step and a '---' body")
    state = restore("\n".join(lines[body_at:]) + "\n")
    return ChainState(state, seed=seed, step_count=step, trace_cap=trace_cap)


def _mass_to(
    state: RepresentationState,
    spec: ProposalSpec,
    target_key,
) -> float:
    """Menu mass of node ``spec.node`` landing on a state with this
    canonical key (summing parallel routes)."""
    total = 0.0
    for pm in spec.singles:
        probe = state.clone()
        apply_move(probe, pm.move)
        if probe.canonical_key() == target_key:
            total += pm.weight
    return total


def _check_state(state: RepresentationState) -> None:
    violation = verify_clique_dependent(state.z, state.t)
    if violation is not None:
        raise AssertionError(f"sampler produced an invalid state: {violation}")
    if not mcs_peo(state.project()).is_chordal:
        raise AssertionError("sampler produced a non-decomposable projection")


def mh_step(
    chain: ChainState,
    f: AffinityModel,
    target: TargetModel,
    check: str = "fast",
) -> StepRecord:
    """One Metropolis-Hastings step; on rejection the pre-state is kept
    untouched.  ``check`` is "debug" (validate every step), "fast"
    (validate every 100 steps) or "off"."""
    state = chain.state
    n = state.node_count
    step = chain.step_count
    rng = chain.rng(step, lane=0)
    i = int(rng.integers(n))
    draw_rng = chain.rng(step, lane=i + 1)

    spec = enumerate_proposals(state, i, promotion_weight=f)
    u = float(draw_rng.random())
    chosen: Optional[ProposalMove] = None
    acc = 0.0
    for pm in spec.singles:
        acc += pm.weight
        if u < acc:
            chosen = pm
            break

    if chosen is None:  # hold
        edges, n_max, biggest = chain.summary_of()
        record = StepRecord(step, i, "hold", True, edges, n_max, biggest)
    else:
        pre_key = state.canonical_key()
        post = state.clone()
        apply_move(post, chosen.move)
        post_key = post.canonical_key()
        q_forward = _mass_to(state, spec, post_key)
        post_spec = enumerate_proposals(post, i, promotion_weight=f)
        q_reverse = _mass_to(post, post_spec, pre_key)
        if q_reverse <= 0.0:
            accept = False
        else:
            log_alpha = (
                target(post) - target(state) + math.log(q_reverse) - math.log(q_forward)
            )
            accept = math.log(float(draw_rng.random())) < min(0.0, log_alpha)
        if accept:
            chain.state = post
        edges, n_max, biggest = chain.summary_of()
        record = StepRecord(step, i, chosen.move.kind, accept, edges, n_max, biggest)

    chain.step_count += 1
    chain.trace.append(record)
    if check == "debug" or (check == "fast" and chain.step_count % 100 == 0):
        _check_state(chain.state)
    return record


def run_chain(
    chain: ChainState,
    f: AffinityModel,
    target: TargetModel,
    steps: int,
    check: str = "fast",
    batched: bool = False,
    on_record: Optional[Callable[[StepRecord], None]] = None,
) -> ChainState:
    """Advance the chain.  Batched mode only changes internal evaluation
    order; because every draw is keyed by (seed, step, node), its results
    are identical to sequential execution."""
    del batched  # evaluation-order hint; draws are keyed, results identical
    for _ in range(steps):
        record = mh_step(chain, f, target, check=check)
        if on_record is not None:
            on_record(record)
    return chain


# ---------------------------------------------------------------------------
# Independent batches
# ---------------------------------------------------------------------------


def node_footprint(state: RepresentationState, i: int) -> frozenset[int]:
    """Clique-nodes a single move of node ``i`` may touch: the induced
    subtree, every connect target, and the targets' parent cliques."""
    ms = move_sets(state, i)
    sub = induced_subtree(state, i)
    fp = set(sub.vertices) | set(ms.nei_max) | set(ms.nei_sub)
    for x in ms.nei_sub:
        fp |= state.t.parents(x)
    return frozenset(fp)


def independent_batches(state: RepresentationState) -> list[list[int]]:
    """Greedy partition of the nodes into batches with pairwise-disjoint
    footprints; deterministic given the state."""
    batches: list[list[int]] = []
    footprints: list[set[int]] = []
    for i in range(state.node_count):
        fp = node_footprint(state, i)
        for batch, used in zip(batches, footprints):
            if not (used & fp):
                batch.append(i)
                used |= fp
                break
        else:
            batches.append([i])
            footprints.append(set(fp))
    return batches


# ---------------------------------------------------------------------------
# Trace / summary plumbing
# ---------------------------------------------------------------------------


def trace_text(chain: ChainState) -> str:
    lines = [TRACE_HEADER]
    lines += [rec.as_tsv(chain.state) for rec in chain.trace]
    return "\n".join(lines) + "\n"


def run_summary(chain: ChainState) -> dict:
    records = list(chain.trace)
    moves = [r for r in records if r.kind != "hold"]
    accepted = sum(1 for r in moves if r.accepted)
    histogram = Counter(r.max_clique_size for r in records)
    return {
        "steps": len(records),
        "proposals": len(moves),
        "accepted": accepted,
        "acceptance_rate": (accepted / len(moves)) if moves else 0.0,
        "max_clique_histogram": {str(k): v for k, v in sorted(histogram.items())},
        "maximal_count_trajectory": [r.maximal_count for r in records],
        "final_edge_count": records[-1].edge_count if records else None,
    }
