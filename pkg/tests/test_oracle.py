import pytest

from subclique.errors import SizeLimitError
from subclique.graphs import UndirectedGraph, mcs_peo
from subclique.moves import all_moves
from subclique.oracle import (
    brute_force_moves,
    enumerate_decomposable,
    graph_from_mask,
    graph_to_mask,
    reference_chordality,
)
from subclique.state import from_graph

from conftest import random_valid_state


def emission_flips(state):
    flips = set()
    for mv in all_moves(state, include_promotions=False):
        bit = 1 if mv.kind == "connect" else 0
        flips.add((mv.target, mv.node, bit))
    return flips


class TestReferenceChordality:
    def test_four_cycle(self):
        g = UndirectedGraph(4)
        for a, b in [(0, 1), (1, 2), (2, 3), (3, 0)]:
            g.add_edge(a, b)
        assert not reference_chordality(g)

    def test_demo_graph(self, demo_g):
        assert reference_chordality(demo_g)

    def test_agreement_with_mcs_exhaustive_n4(self):
        for mask in range(64):
            g = graph_from_mask(4, mask)
            assert reference_chordality(g) == mcs_peo(g).is_chordal

    def test_agreement_with_mcs_sampled_large(self, rng):
        for n in (7, 8):
            n_pairs = n * (n - 1) // 2
            for _ in range(150):
                g = graph_from_mask(n, int(rng.integers(0, 1 << n_pairs)))
                assert reference_chordality(g) == mcs_peo(g).is_chordal

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            reference_chordality(UndirectedGraph(10))


class TestCensus:
    @pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 8), (4, 61)])
    def test_counts(self, n, count):
        assert enumerate_decomposable(n).count == count

    def test_census_is_stable(self):
        a = enumerate_decomposable(4)
        b = enumerate_decomposable(4)
        assert a.chordal_graphs == b.chordal_graphs

    def test_export_text(self):
        text = enumerate_decomposable(3).export_text()
        assert text.splitlines()[0] == "census 3 8"
        assert len(text.splitlines()) == 9

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            enumerate_decomposable(6)

    def test_mask_round_trip(self):
        census = enumerate_decomposable(4)
        for mask in census.chordal_graphs[:10]:
            assert graph_to_mask(census.graph_from_mask(mask)) == mask


class TestBruteForceMoves:
    def test_emissions_are_subset_on_demo(self, demo):
        oracle = brute_force_moves(demo)
        emitted = emission_flips(demo)
        assert emitted <= oracle

    def test_pair_clique_disconnects_present(self):
        g = UndirectedGraph(2, ["A", "B"])
        g.add_edge(0, 1)
        state = from_graph(g)
        cid = state.maximal_ids()[0]
        oracle = brute_force_moves(state)
        assert (cid, 0, 0) in oracle and (cid, 1, 0) in oracle

    def test_interior_flip_absent(self, demo):
        # removing C from CDF leaves the maximal clique CDF of the projection
        # uncovered, whatever completion is tried
        cdf = demo.resolve_clique("CDF")
        c = demo.z.node_by_label("C")
        assert (cdf, c, 0) not in brute_force_moves(demo)

    def test_emissions_are_subset_on_random_states(self, rng):
        for _ in range(8):
            state = random_valid_state(rng, n=5, walk=10)
            assert emission_flips(state) <= brute_force_moves(state)

    def test_size_limit(self):
        state = from_graph(UndirectedGraph(10))
        with pytest.raises(SizeLimitError):
            brute_force_moves(state)
