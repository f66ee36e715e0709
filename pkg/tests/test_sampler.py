import math

import numpy as np
import pytest

from subclique.data import demo_state
from subclique.graphs import UndirectedGraph
from subclique.moves import apply_move
from subclique.oracle import enumerate_decomposable, graph_to_mask
from subclique.sampler import (
    ChainState,
    constant_affinity,
    conditional_prob,
    enumerate_proposals,
    independent_batches,
    make_affinity,
    make_target,
    mh_step,
    node_footprint,
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
from subclique.state import from_graph, snapshot, verify_clique_dependent

from conftest import random_valid_state


def node(state, label):
    return state.z.node_by_label(label)


class TestAffinity:
    def test_registry(self):
        f = make_affinity("const:0.3")
        assert f(None, None, None) == 0.3
        g = make_affinity("size:1.0,0.0")
        state = demo_state()
        assert 0.5 < g(state, state.resolve_clique("ABCD"), 0) < 1.0

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            make_affinity("const:1.5")
        with pytest.raises(ValueError):
            make_affinity("nope:1")


class TestConditional:
    def test_interior_coordinate_is_frozen(self, demo):
        f = constant_affinity(0.3)
        assert conditional_prob(demo, demo.resolve_clique("CDF"), node(demo, "C"), f) == 1.0

    def test_neighbour_coordinate_uses_affinity(self, demo):
        f = constant_affinity(0.3)
        assert conditional_prob(demo, demo.resolve_clique("EF"), node(demo, "H"), f) == 0.3

    def test_zero_affinity_zeroes_mutable_coordinates(self, demo):
        f = constant_affinity(0.0)
        h = node(demo, "H")
        for cid in demo.live():
            p = conditional_prob(demo, cid, h, f)
            assert p in (0.0, 1.0)
            if p == 1.0:
                assert h in demo.z.members_of(cid)


class TestPathJoint:
    def test_node_i_value(self, demo):
        f = constant_affinity(0.5)
        from subclique.moves import move_sets
        from subclique.state import induced_subtree

        i = node(demo, "I")
        q = len(move_sets(demo, i).neighbours)
        size = len(induced_subtree(demo, i).vertices)
        assert size == 2
        assert path_joint(demo, i, f) == pytest.approx(0.5 ** (size + q))

    def test_affinity_one_with_neighbours_gives_zero(self, demo):
        f = constant_affinity(1.0)
        assert path_joint(demo, node(demo, "I"), f) == 0.0

    def test_single_node_state(self):
        state = from_graph(UndirectedGraph(1))
        f = constant_affinity(0.37)
        assert path_joint(state, 0, f) == pytest.approx(0.37)

    def test_forms_agree_on_demo(self, demo):
        for p in (0.2, 0.5, 0.9):
            f = constant_affinity(p)
            for i in range(9):
                a = path_joint_log(demo, i, f)
                b = path_joint_log_indicator(demo, i, f)
                assert abs(a - b) < 1e-12

    def test_forms_agree_on_random_states(self, rng):
        f = size_affinity(0.7, -1.0)
        for _ in range(25):
            state = random_valid_state(rng, n=5, walk=12)
            for i in range(state.node_count):
                a = path_joint_log(state, i, f)
                b = path_joint_log_indicator(state, i, f)
                assert abs(a - b) < 1e-12


class TestProposals:
    def test_node_a_menu_is_uniform_ninths(self, demo):
        spec = enumerate_proposals(demo, node(demo, "A"))
        assert len(spec.singles) == 8
        assert all(pm.weight == pytest.approx(1 / 9) for pm in spec.singles)
        assert spec.hold_weight == pytest.approx(1 / 9)
        assert spec.total_mass() == pytest.approx(1.0)

    def test_subset_mass_arithmetic(self):
        # |M| = 2, m = 1 -> 1!*1!/(|Theta|*2!) = 1/(2*|Theta|)
        assert subset_proposal_mass(9, 1, 2) == pytest.approx(1 / 18)
        assert subset_proposal_mass(9, 0, 0) == pytest.approx(1 / 9)

    def test_total_mass_never_exceeds_one(self, demo, rng):
        states = [demo] + [random_valid_state(rng, n=5, walk=10) for _ in range(5)]
        for state in states:
            for i in range(state.node_count):
                assert enumerate_proposals(state, i).total_mass() <= 1.0 + 1e-12

    def test_constrained_set_reported(self, demo):
        spec = enumerate_proposals(demo, node(demo, "C"))
        labels = sorted(demo.clique_label(c) for c in spec.constrained)
        assert labels == ["CEF"]  # junction-adjacent to the FGH target
        assert [m for m, _ in spec.subset_masses] == [0, 1]


class TestMhStep:
    def test_chain_stays_valid(self, demo):
        # every visited state is validated (debug profile checks each step)
        chain = ChainState(demo, seed=13)
        f = constant_affinity(0.5)
        for _ in range(10_000):
            mh_step(chain, f, uniform_target, check="debug")

    def test_hold_keeps_state(self):
        state = from_graph(UndirectedGraph(2))
        f = constant_affinity(0.5)
        chain = ChainState(state, seed=1)
        seen_hold = False
        for _ in range(200):
            key = chain.state.canonical_key()
            record = mh_step(chain, f, uniform_target, check="off")
            if record.kind == "hold":
                seen_hold = True
                assert chain.state.canonical_key() == key
        assert seen_hold

    def test_determinism(self):
        f = constant_affinity(0.5)
        chains = []
        for _ in range(2):
            chain = ChainState(from_graph(UndirectedGraph(3)), seed=77)
            run_chain(chain, f, uniform_target, steps=300, check="off")
            chains.append(chain)
        assert trace_text(chains[0]) == trace_text(chains[1])
        assert chains[0].state.canonical_key() == chains[1].state.canonical_key()

    def test_batched_equals_sequential(self):
        f = constant_affinity(0.5)
        a = ChainState(from_graph(UndirectedGraph(4)), seed=5)
        b = ChainState(from_graph(UndirectedGraph(4)), seed=5)
        run_chain(a, f, uniform_target, steps=300, check="off", batched=False)
        run_chain(b, f, uniform_target, steps=300, check="off", batched=True)
        assert trace_text(a) == trace_text(b)
        assert a.state.canonical_key() == b.state.canonical_key()

    def test_rejection_restores_pre_state(self):
        # a sharply peaked target forces rejections; the state must be the
        # pre-state object semantics (clone-and-swap), checked canonically
        f = constant_affinity(0.5)
        target = path_joint_target(constant_affinity(0.01))
        chain = ChainState(from_graph(UndirectedGraph(3)), seed=3)
        rejected = 0
        for _ in range(300):
            key = chain.state.canonical_key()
            record = mh_step(chain, f, target, check="debug")
            if record.kind != "hold" and not record.accepted:
                rejected += 1
                assert chain.state.canonical_key() == key
        assert rejected > 0


class TestStationary:
    def kernel(self, start, f, target):
        from conftest import assemble_kernel

        return assemble_kernel(start, f, target)

    def test_two_node_chain_is_exactly_reversible(self):
        f = constant_affinity(0.5)
        target = path_joint_target(f)
        states, flows = self.kernel(from_graph(UndirectedGraph(2)), f, target)
        logpi = {
            k: sum(path_joint_log(s, i, f) for i in range(2))
            for k, s in states.items()
        }
        for a, row in flows.items():
            for b, p in row.items():
                q = flows.get(b, {}).get(a, 0.0)
                lhs = math.exp(logpi[a]) * p
                rhs = math.exp(logpi[b]) * q
                assert abs(lhs - rhs) < 1e-12

    def test_two_node_edge_frequency_matches_stationary(self):
        f = constant_affinity(0.5)
        target = path_joint_target(f)
        states, flows = self.kernel(from_graph(UndirectedGraph(2)), f, target)
        keys = sorted(states, key=str)
        index = {k: i for i, k in enumerate(keys)}
        P = np.zeros((len(keys), len(keys)))
        for a, row in flows.items():
            for b, p in row.items():
                P[index[a], index[b]] = p
        for i in range(len(keys)):
            P[i, i] = 1.0 - P[i].sum()
        pi = np.array(
            [
                math.exp(sum(path_joint_log(states[k], i, f) for i in range(2)))
                for k in keys
            ]
        )
        pi /= pi.sum()
        assert np.allclose(pi @ P, pi, atol=1e-14)
        exact = sum(
            pi[index[k]] for k in keys if states[k].project().edge_count == 1
        )

        chain = ChainState(from_graph(UndirectedGraph(2)), seed=5)
        draws = []
        for _ in range(24000):
            mh_step(chain, f, target, check="off")
            draws.append(chain.state.project().edge_count)
        draws = np.asarray(draws, dtype=float)
        batches = draws.reshape(40, -1).mean(axis=1)
        se = batches.std(ddof=1) / math.sqrt(len(batches))
        assert abs(draws.mean() - exact) < 3 * max(se, 1e-4)


class TestErgodicity:
    def test_four_node_chain_reaches_the_whole_census(self):
        census = enumerate_decomposable(4)
        chain = ChainState(from_graph(UndirectedGraph(4)), seed=11)
        f = constant_affinity(0.5)
        seen = set()
        for _ in range(60000):
            mh_step(chain, f, uniform_target, check="off")
            seen.add(graph_to_mask(chain.state.project()))
            if len(seen) == census.count:
                break
        assert len(seen) == census.count


class TestBatches:
    def test_demo_nodes_a_and_i_share_a_batch(self, demo):
        batches = independent_batches(demo)
        a, i = node(demo, "A"), node(demo, "I")
        batch_of = {n: k for k, batch in enumerate(batches) for n in batch}
        assert batch_of[a] == batch_of[i]
        assert not (node_footprint(demo, a) & node_footprint(demo, i))

    def test_complete_graph_gives_singleton_batches(self):
        g = UndirectedGraph(5)
        for a in range(5):
            for b in range(a + 1, 5):
                g.add_edge(a, b)
        batches = independent_batches(from_graph(g))
        assert all(len(b) == 1 for b in batches)

    def test_partition_is_deterministic_and_complete(self, demo):
        batches = independent_batches(demo)
        assert sorted(n for b in batches for n in b) == list(range(9))
        assert batches == independent_batches(demo_state())

    def test_edgeless_state_conflicts_through_representatives(self):
        # every node's footprint contains the other components'
        # representatives, so the partition degenerates to singletons
        state = from_graph(UndirectedGraph(4))
        assert independent_batches(state) == [[0], [1], [2], [3]]

    def test_batch_moves_commute(self, demo):
        batches = independent_batches(demo)
        batch = max(batches, key=len)
        chosen = {}
        for i in batch:
            spec = enumerate_proposals(demo, i)
            if spec.singles:
                chosen[i] = spec.singles[0].move
        nodes = sorted(chosen)
        if len(nodes) < 2:
            pytest.skip("batch too small to permute")
        forward = demo.clone()
        for i in nodes:
            apply_move(forward, chosen[i])
        backward = demo.clone()
        for i in reversed(nodes):
            apply_move(backward, chosen[i])
        assert forward.canonical_key() == backward.canonical_key()
        assert verify_clique_dependent(forward.z, forward.t) is None


class TestPlumbing:
    def test_trace_format(self):
        chain = ChainState(from_graph(UndirectedGraph(3)), seed=2)
        run_chain(chain, constant_affinity(0.5), uniform_target, steps=5, check="off")
        lines = trace_text(chain).splitlines()
        assert lines[0].startswith("step\tnode")
        assert len(lines) == 6

    def test_checkpoint_round_trip(self, demo):
        chain = ChainState(demo, seed=9)
        run_chain(chain, constant_affinity(0.5), uniform_target, steps=50, check="off")
        text = chain.checkpoint()
        revived = restore_chain(text)
        assert revived.seed == chain.seed
        assert revived.step_count == chain.step_count
        assert snapshot(revived.state) == snapshot(chain.state)
        # resuming produces the same continuation as never stopping
        run_chain(chain, constant_affinity(0.5), uniform_target, steps=25, check="off")
        run_chain(revived, constant_affinity(0.5), uniform_target, steps=25, check="off")
        assert snapshot(revived.state) == snapshot(chain.state)

    def test_summary_fields(self):
        chain = ChainState(from_graph(UndirectedGraph(3)), seed=2)
        run_chain(chain, constant_affinity(0.5), uniform_target, steps=40, check="off")
        s = run_summary(chain)
        assert s["steps"] == 40
        assert 0.0 <= s["acceptance_rate"] <= 1.0
        assert len(s["maximal_count_trajectory"]) == 40

    def test_target_registry(self):
        f = constant_affinity(0.5)
        assert make_target("uniform", f)(demo_state()) == 0.0
        t = make_target("pathjoint:0.1", f)
        assert t(demo_state()) < 0.0
        with pytest.raises(ValueError):
            make_target("nope", f)
