import collections
import math

import numpy as np
import pytest

from subclique.data import demo_graph, demo_state
from subclique.graphs import mcs_peo
from subclique.moves import all_moves, apply_move
from subclique.oracle import graph_from_mask
from subclique.sampler import _mass_to, enumerate_proposals
from subclique.state import from_graph


@pytest.fixture
def demo():
    return demo_state()


@pytest.fixture
def demo_g():
    return demo_graph()


def random_chordal_graph(rng, n):
    n_pairs = n * (n - 1) // 2
    while True:
        g = graph_from_mask(n, int(rng.integers(0, 1 << n_pairs)))
        if mcs_peo(g).is_chordal:
            return g


def random_valid_state(rng, n=5, walk=20):
    """A valid state: a random chordal graph walked through random
    permissible moves (which grow and shuffle sub-cliques)."""
    state = from_graph(random_chordal_graph(rng, n))
    for _ in range(walk):
        menu = all_moves(state)
        apply_move(state, menu[int(rng.integers(len(menu)))])
    return state


def structure(state):
    """Label-level structural summary for comparing against expected
    post-states: maximal memberships, junction edges, sub-clique
    attachment multiset."""
    lab = state.clique_label
    maximal = frozenset(lab(c) for c in state.t.maximal)
    junction = frozenset(
        frozenset((lab(a), lab(b)))
        for a, b in state.t.edges()
        if a in state.t.maximal and b in state.t.maximal
    )
    subs = collections.Counter(
        (lab(c), frozenset(lab(p) for p in state.t.neighbors(c)))
        for c in state.sub_ids()
    )
    return maximal, junction, subs


def expected_structure(maximal, junction, subs):
    return (
        frozenset(maximal),
        frozenset(frozenset(e) for e in junction),
        collections.Counter((name, frozenset(parents)) for name, parents in subs),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)


def assemble_kernel(start, f, target):
    """Breadth-first assembly of the exact single-step transition kernel
    over the reachable canonical state space (off-diagonal masses only)."""
    states = {start.canonical_key(): start}
    flows = {}
    frontier = [start.canonical_key()]
    seen = set()
    while frontier:
        key = frontier.pop()
        if key in seen:
            continue
        seen.add(key)
        state = states[key]
        n = state.node_count
        row = {}
        for j in range(n):
            spec = enumerate_proposals(state, j, promotion_weight=f)
            for pm in spec.singles:
                post = state.clone()
                apply_move(post, pm.move)
                pk = post.canonical_key()
                if pk == key:
                    continue
                q_fwd = _mass_to(state, spec, pk)
                post_spec = enumerate_proposals(post, j, promotion_weight=f)
                q_rev = _mass_to(post, post_spec, key)
                if q_rev <= 0:
                    continue
                alpha = min(1.0, math.exp(target(post) - target(state)) * q_rev / q_fwd)
                row[pk] = row.get(pk, 0.0) + (1.0 / n) * pm.weight * alpha
                if pk not in states:
                    states[pk] = post
                    frontier.append(pk)
        flows[key] = row
    return states, flows
