from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import error_states
from oracles import adjacency_table, named_edges
from toric_lab.lattice import ErrorState, Syndrome, ToricLattice, apply_flip, compute_syndrome, syndrome_array
from toric_lab.perspectives import make_perspectives, perspective_grids, resolve_action, untranslate


def _syn(d, coords):
    return Syndrome.from_coords(d, coords)


def test_terminal_has_no_perspectives():
    with pytest.raises(ValueError, match="terminal state has no perspectives"):
        make_perspectives(Syndrome(np.zeros((5, 5), dtype=np.uint8)))


def test_pair_keeps_relative_offset():
    d = 5
    a, b = (0, 1), (3, 4)
    ps = make_perspectives(_syn(d, [a, b]))
    assert [p.origin for p in ps] == [a, b]
    c = d // 2
    for p, other in zip(ps, [b, a]):
        off = ((other[0] - p.origin[0]) % d, (other[1] - p.origin[1]) % d)
        assert p.grid[c, c] == 1
        assert p.grid[(c + off[0]) % d, (c + off[1]) % d] == 1
        assert p.grid.sum() == 2


def test_centred_defect_gives_raw_syndrome():
    syn = _syn(5, [(2, 2), (4, 0)])
    ps = make_perspectives(syn)
    centred = [p for p in ps if p.origin == (2, 2)][0]
    assert np.array_equal(centred.grid, syn.defects)
    assert centred.shift == (0, 0)


@given(error_states(), st.integers(0, 8), st.integers(0, 8))
def test_prop_perspectives_translation_invariant(case, dr, dc):
    d, flips = case
    defects = syndrome_array(d, flips)
    if not defects.any():
        return
    base = Counter(p.grid.tobytes() for p in make_perspectives(Syndrome(defects)))
    moved = Counter(p.grid.tobytes() for p in make_perspectives(Syndrome(np.roll(defects, (dr, dc), axis=(0, 1)))))
    assert base == moved


@given(error_states())
def test_prop_perspective_invariants(case):
    d, flips = case
    syn = Syndrome(syndrome_array(d, flips))
    if syn.is_terminal:
        return
    ps = make_perspectives(syn)
    assert len(ps) == syn.count
    for p in ps:
        assert p.grid[d // 2, d // 2] == 1
        assert p.grid.sum() == syn.count
        assert np.array_equal(p.grid, np.roll(syn.defects, p.shift, axis=(0, 1)))
        assert np.array_equal(untranslate(p), syn.defects)


def test_vectorised_grids_match_objects():
    syn = compute_syndrome(ToricLattice(7), ErrorState(7, (np.random.default_rng(1).random(98) < 0.2).astype(np.uint8)))
    grids, origins = perspective_grids(syn.defects)
    ps = make_perspectives(syn)
    assert len(grids) == len(ps)
    for g, o, p in zip(grids, origins, ps):
        assert np.array_equal(g, p.grid) and tuple(o) == p.origin


@pytest.mark.parametrize("d", [3, 5, 7])
def test_resolve_action_distinct_adjacent(d):
    lat = ToricLattice(d)
    table = adjacency_table(d)
    for r in range(d):
        for c in range(d):
            other = ((r + 1) % d, (c + 2) % d)
            p = [x for x in make_perspectives(_syn(d, [(r, c), other])) if x.origin == (r, c)][0]
            qs = [resolve_action(p, a) for a in range(4)]
            assert len(set(qs)) == 4
            assert all((r, c) in table[q] for q in qs)
            ref = named_edges(d, r, c)
            assert qs == [ref["up"], ref["down"], ref["left"], ref["right"]]
            for q in qs:
                after = compute_syndrome(lat, apply_flip(ErrorState.empty(d), q))
                assert set(after.coords()) == table[q]


def test_resolve_action_d3_origin_up():
    p = make_perspectives(_syn(3, [(0, 0), (1, 1)]))[0]
    assert p.origin == (0, 0)
    assert resolve_action(p, 0) == named_edges(3, 0, 0)["up"]


@pytest.mark.parametrize("a", [-1, 4, 7])
def test_resolve_action_rejects_bad_id(a):
    p = make_perspectives(_syn(3, [(0, 0), (1, 1)]))[0]
    with pytest.raises(ValueError):
        resolve_action(p, a)


def test_action_on_centred_grid_moves_centre_defect():
    # acting "down" on the perspective and untranslating equals acting on the raw syndrome
    d = 5
    lat = ToricLattice(d)
    syn = _syn(d, [(0, 3), (4, 1)])
    for p in make_perspectives(syn):
        for a in range(4):
            q = resolve_action(p, a)
            raw = syn.defects ^ syndrome_array(d, ErrorState.from_indices(d, [q]).flips)
            c = lat.center
            local = p.grid ^ syndrome_array(d, ErrorState.from_indices(d, [lat.boundary(*c)[a]]).flips)
            assert np.array_equal(np.roll(local, (-p.shift[0], -p.shift[1]), axis=(0, 1)), raw)
