import numpy as np
import pytest

from mcld.errors import InvalidInput
from mcld.multigraph import (
    ComponentMultigraph,
    classify_bad,
    classify_bad_bruteforce,
)


def mg(n_lower, n_upper, edges, damaged_lower=(), damaged_upper=()):
    return ComponentMultigraph(
        n_lower=n_lower,
        n_upper=n_upper,
        edges=tuple(edges),
        damaged_lower=tuple(k in damaged_lower for k in range(n_lower)),
        damaged_upper=tuple(l in damaged_upper for l in range(n_upper)),
    )


class TestClassifyBad:
    def test_no_damage_means_no_bad(self):
        cm = mg(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)])
        assert classify_bad(cm) == frozenset()

    def test_damaged_leaf_in_tree_is_good(self):
        # k damaged with degree one in a tree and no other damage: the fire
        # can only spread away from k, so k itself keeps its intact part
        cm = mg(2, 1, [(0, 0), (1, 0)], damaged_lower={0})
        assert 0 not in classify_bad(cm)
        assert classify_bad(cm) == frozenset({1})

    def test_intact_vertex_next_to_damage_is_bad(self):
        cm = mg(1, 1, [(0, 0)], damaged_upper={0})
        assert classify_bad(cm) == frozenset({0})

    def test_parallel_edges_make_a_circuit(self):
        # two parallel edges at a damaged k form an edge-simple walk back to k
        cm = mg(1, 1, [(0, 0), (0, 0)], damaged_lower={0})
        assert classify_bad(cm) == frozenset({0})

    def test_damaged_on_simple_cycle_is_bad(self):
        cm = mg(2, 2, [(0, 0), (1, 0), (1, 1), (0, 1)], damaged_lower={0})
        assert 0 in classify_bad(cm)

    def test_damage_in_other_component_does_not_leak(self):
        cm = mg(2, 2, [(0, 0), (1, 1)], damaged_upper={1})
        assert classify_bad(cm) == frozenset({1})

    def test_isolated_damaged_lower_is_good(self):
        # no edges at all: no walk of length >= 1 exists
        cm = mg(1, 0, [], damaged_lower={0})
        assert classify_bad(cm) == frozenset()

    def test_flag_length_validated(self):
        with pytest.raises(InvalidInput):
            ComponentMultigraph(
                n_lower=2,
                n_upper=0,
                edges=(),
                damaged_lower=(True,),
                damaged_upper=(),
            )


def random_multigraph(rng) -> ComponentMultigraph:
    n_lower = int(rng.integers(1, 5))
    n_upper = int(rng.integers(0, 5 - min(n_lower, 4) + 4))
    n_upper = min(n_upper, 8 - n_lower)
    n_edges = int(rng.integers(0, 11)) if n_upper else 0
    edges = [
        (int(rng.integers(0, n_lower)), int(rng.integers(0, n_upper)))
        for _ in range(n_edges)
    ]
    return ComponentMultigraph(
        n_lower=n_lower,
        n_upper=n_upper,
        edges=tuple(edges),
        damaged_lower=tuple(bool(rng.integers(0, 2)) for _ in range(n_lower)),
        damaged_upper=tuple(bool(rng.integers(0, 2)) for _ in range(n_upper)),
    )


class TestOracleEquivalence:
    def test_thousand_random_instances(self):
        rng = np.random.default_rng(424242)
        for _ in range(1000):
            cm = random_multigraph(rng)
            assert classify_bad(cm) == classify_bad_bruteforce(cm), cm

    def test_bridge_chain_with_far_damage(self):
        # path k0 - l0 - k1 - l1 (damage at l1): every lower vertex on the
        # path reaches the damage by a simple path
        cm = mg(2, 2, [(0, 0), (1, 0), (1, 1)], damaged_upper={1})
        assert classify_bad(cm) == frozenset({0, 1})
