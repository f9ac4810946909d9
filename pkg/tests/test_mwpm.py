import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bfs_distance, brute_min_matching
from toric_lab.blossom import max_weight_matching, min_weight_perfect_matching
from toric_lab.lattice import ErrorState, Syndrome, ToricLattice, apply_flip, compute_syndrome, is_success
from toric_lab.mwpm import (
    DefectGraph,
    build_defect_graph,
    min_weight_matching,
    mwpm_decode,
    path_edges,
    toric_distance,
)


def _random_syndrome(d, k, rng):
    cells = rng.choice(d * d, size=k, replace=False)
    return Syndrome.from_coords(d, [divmod(int(x), d) for x in cells])


def test_graph_adjacent_and_wrap():
    g = build_defect_graph(Syndrome.from_coords(5, [(0, 0), (0, 1)]))
    assert g.weight(0, 1) == 1
    g = build_defect_graph(Syndrome.from_coords(5, [(0, 0), (0, 4)]))
    assert g.weight(0, 1) == 1


def test_graph_weights_match_bfs():
    rng = np.random.default_rng(5)
    for d in (3, 5, 7, 9):
        for _ in range(20):
            syn = _random_syndrome(d, 8, rng)
            g = build_defect_graph(syn)
            for i, j in itertools.combinations(range(8), 2):
                assert g.weight(i, j) == bfs_distance(d, g.nodes[i], g.nodes[j])


def test_graph_rejects_odd_defects():
    with pytest.raises(AssertionError):
        build_defect_graph(Syndrome.from_coords(5, [(0, 0), (1, 1), (2, 2)]))
    with pytest.raises(ValueError):
        min_weight_matching(DefectGraph(5, ((0, 0),), ((0,),)))


def test_two_nodes_unique_pair():
    m = min_weight_matching(build_defect_graph(Syndrome.from_coords(5, [(1, 1), (3, 2)])))
    assert m.pairs == ((0, 1),) and m.weight == 3


def test_greedy_suboptimal_case():
    # spacing 1,1,1 on a line: greedy pairs the middle (1) then the ends (3)
    d = 9
    syn = Syndrome.from_coords(d, [(0, 0), (0, 1), (0, 2), (0, 3)])
    g = build_defect_graph(syn)
    m = min_weight_matching(g)
    assert m.weight == 2
    assert set(m.pairs) == {(0, 1), (2, 3)}


@pytest.mark.parametrize("d", [3, 5, 7])
def test_matches_brute_force(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(500):
        k = 2 * int(rng.integers(1, min(5, d * d // 2) + 1))
        g = build_defect_graph(_random_syndrome(d, k, rng))
        m = min_weight_matching(g)
        assert sorted(i for pr in m.pairs for i in pr) == list(range(k))
        assert m.weight == brute_min_matching(g.weights)


def _brute_max_weight(n, edges, max_card):
    best = None
    for r in range(0, n // 2 + 1):
        for sub in itertools.combinations(edges, r):
            used = [v for i, j, _ in sub for v in (i, j)]
            if len(used) != len(set(used)):
                continue
            key = (r, sum(w for *_, w in sub)) if max_card else (0, sum(w for *_, w in sub))
            if best is None or key > best:
                best = key
    return best


@given(
    st.integers(2, 7).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(
                st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(-5, 20)),
                min_size=1,
                max_size=12,
            ),
        )
    ),
    st.booleans(),
)
def test_prop_general_max_weight_matching(case, max_card):
    n, raw = case
    seen, edges = set(), []
    for i, j, w in raw:
        if i != j and frozenset((i, j)) not in seen:
            seen.add(frozenset((i, j)))
            edges.append((i, j, w))
    if not edges:
        return
    mate = max_weight_matching(edges, max_cardinality=max_card)
    weight_of = {frozenset((i, j)): w for i, j, w in edges}
    pairs = {frozenset((v, u)) for v, u in enumerate(mate) if u >= 0}
    for v, u in enumerate(mate):
        if u >= 0:
            assert mate[u] == v
    assert all(pr in weight_of for pr in pairs)
    got = (len(pairs) if max_card else 0, sum(weight_of[pr] for pr in pairs))
    assert got == _brute_max_weight(n, edges, max_card)


def test_min_weight_perfect_matching_validates():
    assert min_weight_perfect_matching([]) == []
    with pytest.raises(ValueError):
        min_weight_perfect_matching([[0]])


def test_adjacent_pair_corrected_on_shared_edge():
    d = 5
    lat = ToricLattice(d)
    syn = Syndrome.from_coords(d, [(1, 1), (1, 2)])
    corr = mwpm_decode(lat, syn)
    assert corr.indices() == [lat.qubit(1, 1, 2)]


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_single_error_corrected_exactly(d):
    lat = ToricLattice(d)
    for q in range(lat.n_qubits):
        err = apply_flip(ErrorState.empty(d), q)
        corr = mwpm_decode(lat, compute_syndrome(lat, err))
        assert corr == err
        assert is_success(err ^ corr)


def test_empty_syndrome_empty_correction():
    assert mwpm_decode(ToricLattice(5), Syndrome(np.zeros((5, 5), dtype=np.uint8))).weight == 0


@given(st.sampled_from([3, 5, 7]), st.data())
def test_prop_paths(d, data):
    lat = ToricLattice(d)
    a = (data.draw(st.integers(0, d - 1)), data.draw(st.integers(0, d - 1)))
    b = (data.draw(st.integers(0, d - 1)), data.draw(st.integers(0, d - 1)))
    for rows_first in (True, False):
        path = path_edges(lat, a, b, rows_first)
        assert len(path) == toric_distance(d, a, b) == len(set(path))
        syn = compute_syndrome(lat, ErrorState.from_indices(d, path))
        assert set(syn.coords()) == ({a, b} if a != b else set())


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_correction_clears_syndrome(d):
    lat = ToricLattice(d)
    rng = np.random.default_rng(d)
    for _ in range(200):
        err = ErrorState(d, (rng.random(lat.n_qubits) < 0.12).astype(np.uint8))
        syn = compute_syndrome(lat, err)
        for rows_first in (True, False):
            corr = mwpm_decode(lat, syn, rows_first)
            assert compute_syndrome(lat, err ^ corr).is_terminal
            g = build_defect_graph(syn) if not syn.is_terminal else None
            if g is not None:
                assert corr.weight <= min_weight_matching(g).weight


def test_path_orders_agree_statistically():
    # the two L-shape orders are different decoders of equal matching weight;
    # their logical success rates must agree to Monte-Carlo precision
    d, p, n = 5, 0.05, 4000
    lat = ToricLattice(d)
    rng = np.random.default_rng(0)
    wins = [0, 0]
    for _ in range(n):
        err = ErrorState(d, (rng.random(lat.n_qubits) < p).astype(np.uint8))
        syn = compute_syndrome(lat, err)
        for k, rows_first in enumerate((True, False)):
            wins[k] += is_success(err ^ mwpm_decode(lat, syn, rows_first))
    assert abs(wins[0] - wins[1]) / n <= 0.01


def test_matching_weight_invariant_under_relabeling():
    rng = np.random.default_rng(8)
    for _ in range(200):
        k = 2 * int(rng.integers(1, 8))
        d = 9
        cells = rng.choice(d * d, size=k, replace=False)
        nodes = [divmod(int(x), d) for x in cells]
        w = [[toric_distance(d, a, b) for b in nodes] for a in nodes]
        perm = rng.permutation(k)
        wp = [[w[i][j] for j in perm] for i in perm]
        a = sum(w[i][j] for i, j in min_weight_perfect_matching(w))
        b = sum(wp[i][j] for i, j in min_weight_perfect_matching(wp))
        assert a == b
