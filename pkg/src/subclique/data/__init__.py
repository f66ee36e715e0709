"""Bundled fixtures: the 9-node worked example (nodes A-I, five maximal
cliques ABCD, CDF, CEF, FGH, HI and ten sub-cliques) used throughout the
tests and docs."""

from importlib.resources import files

from ..graphs import UndirectedGraph, parse_edge_list
from ..state import RepresentationState, restore


def demo_state_text() -> str:
    return files(__package__).joinpath("demo_state.txt").read_text(encoding="utf-8")


def demo_state() -> RepresentationState:
    return restore(demo_state_text())


def demo_graph_text() -> str:
    return files(__package__).joinpath("demo_graph.edges").read_text(encoding="utf-8")


def demo_graph() -> UndirectedGraph:
    return parse_edge_list(demo_graph_text())
