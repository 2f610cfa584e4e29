"""Tests for congruence quotients, Cayley graphs and Poincare constants."""
import json
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from errors import ExpanderError
from expander_forge import (
    FiniteRingPoly,
    GeneratorElement,
    build_quotient,
    cayley_graph,
    complete_graph,
    cycle_graph,
    export,
    fiedler_map,
    graph_to_json,
    import_json,
    left_translation_permutation,
    steinberg_generators,
    poincare_constants,
    poincare_ratio,
    poincare_to_json,
    reduction_map,
    render_graph,
    sl_order,
    spectral_gap,
)


@pytest.fixture(scope="module")
def el3_f2():
    return build_quotient(3, 2, 1)


@pytest.fixture(scope="module")
def el3_f2_t2():
    return build_quotient(3, 2, 2)


@pytest.fixture(scope="module")
def el3_f2_graph(el3_f2):
    return cayley_graph(el3_f2)


class TestRing:
    def test_multiplication_truncates(self):
        ring = FiniteRingPoly(3, 2)
        one_plus_t = ring.element([1, 1])
        np.testing.assert_array_equal(ring.mul(one_plus_t, one_plus_t), [1, 2])
        np.testing.assert_array_equal(ring.mul(ring.t_power(1), ring.t_power(1)), [0, 0])

    def test_elements(self):
        ring = FiniteRingPoly(2, 3)
        assert ring.size == 8
        assert len({tuple(e) for e in ring.elements()}) == 8

    def test_additive_inverse(self):
        ring = FiniteRingPoly(5, 2)
        a = ring.element([3, 4])
        np.testing.assert_array_equal(ring.add(a, ring.neg(a)), ring.zero())

    @pytest.mark.parametrize("q,k", [(4, 1), (257, 1), (3, 0)])
    def test_bad_parameters(self, q, k):
        with pytest.raises(ExpanderError):
            FiniteRingPoly(q, k)

    def test_elementary_products_add(self):
        ring = FiniteRingPoly(5, 2)
        a, b = ring.element([2, 1]), ring.element([4, 3])
        product = ring.matmul(ring.elementary(3, 1, 2, a), ring.elementary(3, 1, 2, b))
        np.testing.assert_array_equal(product, ring.elementary(3, 1, 2, ring.add(a, b)))

    def test_matmul_matches_naive(self):
        ring = FiniteRingPoly(3, 3)
        rng = np.random.default_rng(4)
        a = rng.integers(0, 3, size=(3, 3, 3))
        b = rng.integers(0, 3, size=(3, 3, 3))
        expected = np.zeros((3, 3, 3), dtype=np.int64)
        for i in range(3):
            for j in range(3):
                for l in range(3):
                    expected[i, j] = ring.add(expected[i, j], ring.mul(a[i, l], b[l, j]))
        np.testing.assert_array_equal(ring.matmul(a, b), expected)

    def test_elementary_position(self):
        ring = FiniteRingPoly(2, 1)
        with pytest.raises(ExpanderError):
            ring.elementary(3, 2, 2, ring.one())


class TestGenerators:
    def test_layout(self):
        gens = steinberg_generators(3, 2, 1)
        assert [g.label for g in gens] == ["e_1,2(1)", "e_2,3(1)", "e_3,1(1)", "e_3,1(1*t)"]
        assert [g.degenerate for g in gens] == [False, False, False, True]

    def test_no_degenerate_above_k_one(self):
        gens = steinberg_generators(4, 3, 2)
        assert len(gens) == (4 - 1) * 2 + 2 * 2
        assert not any(g.degenerate for g in gens)

    def test_bad_arguments(self):
        with pytest.raises(ExpanderError):
            steinberg_generators(2, 2, 1)
        with pytest.raises(ExpanderError):
            steinberg_generators(3, 2, 1, m_style="free")


class TestQuotients:
    @pytest.mark.parametrize("n,q,k,order", [(3, 2, 1, 168), (3, 2, 2, 43008), (3, 3, 1, 5616)])
    def test_sl_order(self, n, q, k, order):
        assert sl_order(n, q, k) == order

    def test_orders_by_closure(self, el3_f2, el3_f2_t2):
        assert el3_f2.order == 168
        assert el3_f2_t2.order == 43008

    def test_order_three(self):
        assert build_quotient(3, 3, 1).order == sl_order(3, 3, 1)

    def test_keys_sorted(self, el3_f2):
        assert list(el3_f2.keys) == sorted(el3_f2.keys)

    def test_multiply(self, el3_f2):
        e = el3_f2.identity_index
        for i in range(0, el3_f2.order, 17):
            assert el3_f2.multiply(e, i) == i == el3_f2.multiply(i, e)

    def test_action_is_right_multiplication(self, el3_f2):
        ring = el3_f2.ring
        for s, generator in enumerate(el3_f2.generators):
            for x in range(0, el3_f2.order, 11):
                target = el3_f2.index_of(ring.matmul(el3_f2.element(x), generator.matrix))
                assert el3_f2.action[s, x] == target

    def test_non_element(self, el3_f2):
        with pytest.raises(ExpanderError) as info:
            el3_f2.index_of(np.zeros((3, 3, 1), dtype=np.int64))
        assert info.value.code == "not_an_element"

    def test_cap(self):
        with pytest.raises(ExpanderError) as info:
            build_quotient(3, 2, 1, cap=100)
        assert info.value.code == "cap_exceeded"

    def test_reduction_is_onto_homomorphism(self, el3_f2, el3_f2_t2):
        images = {el3_f2.index_of(reduction_map(x, 1)) for x in el3_f2_t2.elements}
        assert len(images) == 168
        rng = np.random.default_rng(0)
        ring = el3_f2_t2.ring
        for i, j in rng.integers(0, el3_f2_t2.order, size=(50, 2)):
            product = ring.matmul(el3_f2_t2.element(i), el3_f2_t2.element(j))
            reduced = el3_f2.ring.matmul(reduction_map(el3_f2_t2.element(i), 1),
                                         reduction_map(el3_f2_t2.element(j), 1))
            np.testing.assert_array_equal(reduction_map(product, 1), reduced)

    def test_reduction_degree(self, el3_f2):
        with pytest.raises(ExpanderError):
            reduction_map(el3_f2.element(0), 2)


class TestCayleyGraphs:
    def test_el3_graph(self, el3_f2_graph):
        assert el3_f2_graph.order == 168
        assert el3_f2_graph.valency == 3
        assert el3_f2_graph.is_regular() and el3_f2_graph.is_symmetric() and el3_f2_graph.is_connected()

    def test_vertex_labels_are_keys(self, el3_f2, el3_f2_graph):
        assert el3_f2_graph.vertex_labels[0] == el3_f2.keys[0].hex()

    def test_left_translations_are_automorphisms(self, el3_f2, el3_f2_graph):
        dense = el3_f2_graph.adjacency.toarray()
        for g in (1, 50, 120):
            perm = left_translation_permutation(el3_f2, g)
            assert sorted(perm) == list(range(168))
            inverse = np.argsort(perm)
            np.testing.assert_array_equal(dense[np.ix_(inverse, inverse)], dense)

    def test_not_symmetric(self):
        quotient = build_quotient(3, 3, 1)
        ring = quotient.ring
        half = [GeneratorElement("e_1,2(1)", ring.elementary(3, 1, 2, ring.one()))]
        with pytest.raises(ExpanderError) as info:
            cayley_graph(quotient, half)
        assert info.value.code == "not_symmetric"

    def test_circulants(self):
        assert complete_graph(5).valency == 4
        assert cycle_graph(6).valency == 2
        with pytest.raises(ExpanderError):
            complete_graph(1)
        with pytest.raises(ExpanderError):
            cycle_graph(2)


class TestSpectra:
    @pytest.mark.parametrize("m", [3, 5, 8])
    def test_complete_graph_gap(self, m):
        assert spectral_gap(complete_graph(m)) == pytest.approx(m / (m - 1))

    @pytest.mark.parametrize("m", [5, 6, 11])
    def test_cycle_gap(self, m):
        assert spectral_gap(cycle_graph(m)) == pytest.approx(1 - math.cos(2 * math.pi / m))

    def test_quotient_gaps_positive(self, el3_f2_graph, el3_f2_t2):
        assert spectral_gap(el3_f2_graph) > 0
        assert spectral_gap(cayley_graph(el3_f2_t2), seed=0) > 0

    def test_disconnected(self):
        graph = import_json({"order": 4, "vertices": ["a", "b", "c", "d"], "edges": [[0, 1, 1], [2, 3, 1]]})
        with pytest.raises(ExpanderError) as info:
            spectral_gap(graph)
        assert info.value.code == "disconnected"


class TestPoincare:
    def test_inequality_on_random_maps(self, el3_f2_graph):
        c_l2 = 1 / spectral_gap(el3_f2_graph)
        rng = np.random.default_rng(1)
        for _ in range(100):
            phi = rng.normal(size=(168, 3))
            assert poincare_ratio(el3_f2_graph, phi) <= c_l2 * (1 + 1e-9)

    def test_fiedler_map_attains_constant(self, el3_f2_graph):
        c_l2 = 1 / spectral_gap(el3_f2_graph)
        assert poincare_ratio(el3_f2_graph, fiedler_map(el3_f2_graph)) == pytest.approx(c_l2, abs=1e-6)

    def test_constant_map(self):
        assert poincare_ratio(cycle_graph(5), np.ones(5)) == 0.0

    def test_complete_graph_constants(self):
        report = poincare_constants(complete_graph(5), p_values=(2.0, 3.0), seed=0, restarts=4, steps=40,
                                    threads=1)
        assert report.c_l2 == pytest.approx(4 / 5)
        assert report.c_lp_lower[2.0] == pytest.approx(4 / 5, rel=1e-6)
        assert report.c_lp_lower[3.0] > 0
        assert report.diameter == 1

    def test_lower_bound_below_exact(self, el3_f2_graph):
        report = poincare_constants(el3_f2_graph, p_values=(2.0,), seed=3, restarts=3, steps=30)
        assert report.c_lp_lower[2.0] <= report.c_l2 * (1 + 1e-9)
        assert report.c_lp_lower[2.0] >= report.c_l2 * 0.99
        assert report.valency == 3

    def test_report_is_seeded(self):
        graph = cycle_graph(7)
        first = poincare_constants(graph, p_values=(1.5,), seed=9, restarts=3, steps=20)
        second = poincare_constants(graph, p_values=(1.5,), seed=9, restarts=3, steps=20)
        assert first.c_lp_lower == second.c_lp_lower
        data = poincare_to_json(first)
        assert set(data["c_lp"]) == {"1.5"}


class TestExport:
    def test_cycle_csv(self, tmp_path):
        path = tmp_path / "c6.csv"
        export(cycle_graph(6), "csv_edges", str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 6
        assert lines[0] == "0,1"

    def test_dot(self):
        text = render_graph(cycle_graph(4), "dot")
        assert text.startswith('graph "C4" {')
        assert text.count(" -- ") == 4

    def test_json_round_trip(self, tmp_path, el3_f2_graph):
        path = tmp_path / "el3.json"
        export(el3_f2_graph, "json", str(path))
        rebuilt = import_json(str(path))
        assert (rebuilt.adjacency != el3_f2_graph.adjacency).nnz == 0
        assert rebuilt.vertex_labels == el3_f2_graph.vertex_labels
        assert graph_to_json(rebuilt) == json.loads(path.read_text(encoding="utf-8"))

    def test_render_is_deterministic(self, el3_f2_graph):
        assert render_graph(el3_f2_graph, "csv_edges") == render_graph(cayley_graph(build_quotient(3, 2, 1)),
                                                                      "csv_edges")

    def test_bad_format(self):
        with pytest.raises(ExpanderError):
            render_graph(cycle_graph(4), "svg")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(ExpanderError) as info:
            export(cycle_graph(4), "json", str(tmp_path))
        assert info.value.code == "io_error"
        assert not any(p.name.startswith(".tmp-") for p in tmp_path.parent.iterdir())

    def test_export_replaces_whole_file(self, tmp_path):
        path = tmp_path / "nested" / "cycle.csv"
        export(cycle_graph(5), "csv_edges", str(path))
        export(cycle_graph(6), "csv_edges", str(path))
        assert len(path.read_text(encoding="utf-8").splitlines()) == 6
        assert [p.name for p in path.parent.iterdir()] == ["cycle.csv"]

    def test_malformed_json(self):
        with pytest.raises(ExpanderError) as info:
            import_json({"order": 2, "vertices": ["a"], "edges": []})
        assert info.value.code == "malformed_graph"
