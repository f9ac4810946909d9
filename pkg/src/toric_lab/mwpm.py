"""Minimum-weight perfect matching decoder for plaquette defects."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blossom import min_weight_perfect_matching
from .lattice import HORIZONTAL, VERTICAL, ErrorState, Syndrome, ToricLattice


def toric_distance(d: int, a: tuple[int, int], b: tuple[int, int]) -> int:
    dr = abs(a[0] - b[0]) % d
    dc = abs(a[1] - b[1]) % d
    return min(dr, d - dr) + min(dc, d - dc)


@dataclass(frozen=True)
class DefectGraph:
    d: int
    nodes: tuple[tuple[int, int], ...]
    weights: tuple[tuple[int, ...], ...]

    def weight(self, i: int, j: int) -> int:
        return self.weights[i][j]


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]
    weight: int


def build_defect_graph(syn: Syndrome) -> DefectGraph:
    nodes = tuple(syn.coords())
    if len(nodes) % 2:
        raise AssertionError(f"odd number of defects ({len(nodes)}); syndrome is not physical")
    d = syn.d
    weights = tuple(tuple(toric_distance(d, a, b) for b in nodes) for a in nodes)
    return DefectGraph(d, nodes, weights)


def min_weight_matching(g: DefectGraph) -> Matching:
    if len(g.nodes) % 2:
        raise ValueError(f"perfect matching needs an even node count, got {len(g.nodes)}")
    pairs = tuple(min_weight_perfect_matching(g.weights))
    return Matching(pairs, sum(g.weights[i][j] for i, j in pairs))


def _steps(delta: int, d: int) -> tuple[int, int]:
    """(direction, count) of the shorter way round for a signed offset."""
    forward = delta % d
    backward = d - forward
    if forward == backward:
        raise AssertionError("tied wrap direction; lattice dimension must be odd")
    return (1, forward) if forward < backward else (-1, backward)


def path_edges(lattice: ToricLattice, a: tuple[int, int], b: tuple[int, int], rows_first: bool = True) -> list[int]:
    """Edges of an L-shaped shortest path carrying a defect from plaquette a to b."""
    d = lattice.d
    r, c = a
    sr, nr = _steps(b[0] - a[0], d)
    sc, nc = _steps(b[1] - a[1], d)
    out = []

    def move_rows() -> None:
        nonlocal r
        for _ in range(nr):
            # moving down crosses the top edge of the plaquette below
            out.append(lattice.qubit(HORIZONTAL, r + 1 if sr > 0 else r, c))
            r = (r + sr) % d

    def move_cols() -> None:
        nonlocal c
        for _ in range(nc):
            out.append(lattice.qubit(VERTICAL, r, c + 1 if sc > 0 else c))
            c = (c + sc) % d

    if rows_first:
        move_rows()
        move_cols()
    else:
        move_cols()
        move_rows()
    return out


def matching_to_correction(
    lattice: ToricLattice, syn: Syndrome, m: Matching, rows_first: bool = True
) -> ErrorState:
    nodes = syn.coords()
    flips = np.zeros(lattice.n_qubits, dtype=np.uint8)
    for i, j in m.pairs:
        for q in path_edges(lattice, nodes[i], nodes[j], rows_first):
            flips[q] ^= 1
    return ErrorState(lattice.d, flips)


def mwpm_decode(lattice: ToricLattice, syn: Syndrome, rows_first: bool = True) -> ErrorState:
    if syn.is_terminal:
        return ErrorState.empty(lattice.d)
    g = build_defect_graph(syn)
    return matching_to_correction(lattice, syn, min_weight_matching(g), rows_first)
