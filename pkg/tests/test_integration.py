import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from coset_spectra import angle_report
from finite_group import build_heisenberg, closure, pair_handles
from group_algebra import averaging_idempotent, regular_rep
from projection_lab import cos_angle, euclidean, iterate_averaged, make_family
from robust_t_criterion import GeneratorScheme, PairData, evaluate


def heisenberg_projections(q):
    table = build_heisenberg(q)
    k1, k2 = pair_handles(table)
    joint = closure(table, k1.elements + k2.elements)
    mats = [regular_rep(averaging_idempotent(sub)).matrix for sub in (k1, k2, joint)]
    return table, (k1, k2), mats


class TestHeisenbergAcrossModules:
    """The same angle seen through the group algebra, the coset graph and the criterion."""

    @pytest.fixture(params=[2, 3])
    def setup(self, request):
        return request.param, heisenberg_projections(request.param)

    def test_projection_angle_matches_coset_graph(self, setup):
        q, (table, (k1, k2), (p1, p2, p12)) = setup
        measured = cos_angle(p1, p2, p12, euclidean(table.order))
        report = angle_report(k1, k2, [2.0])
        assert measured == pytest.approx(report.hilbert_cos, abs=1e-9)
        assert measured == pytest.approx(1 / math.sqrt(q), abs=1e-9)

    def test_synthesized_meet_is_the_joint_idempotent(self, setup):
        _, (table, _, (p1, p2, p12)) = setup
        family = make_family(euclidean(table.order), [p1, p2])
        np.testing.assert_allclose(family.pairwise_meets[(0, 1)], p12, atol=1e-9)

    def test_explicit_pair_agrees_with_closed_form(self, setup):
        q, (_, (k1, k2), _) = setup
        explicit = PairData.explicit(angle_report(k1, k2, [2.0, 4.0]))
        closed = PairData.heisenberg(q)
        assert explicit.cos() == pytest.approx(closed.cos(), abs=1e-9)
        for r in (2.0, 4.0):
            assert explicit.schatten_at(r) == pytest.approx(closed.schatten_at(r), abs=1e-9)


def test_averaged_heisenberg_pair_converges_to_joint_projection():
    table, _, (p1, p2, p12) = heisenberg_projections(3)
    family = make_family(euclidean(table.order), [p1, p2])
    certificate = iterate_averaged(family, max_n=200)
    assert certificate.converged
    np.testing.assert_allclose(certificate.t_infinity, p12, atol=1e-8)
    assert certificate.limit_rank == 1


def test_measured_scheme_matches_closed_form_scheme():
    _, (k1, k2), _ = heisenberg_projections(5)
    explicit = PairData.explicit(angle_report(k1, k2, [2.0, 3.0, 4.0]))
    measured = evaluate(GeneratorScheme(2, {(1, 2): explicit}, name="measured"))
    closed = evaluate(GeneratorScheme(2, {(1, 2): PairData.heisenberg(5)}, name="closed"))
    assert measured.verdict == closed.verdict
    assert measured.cos_max_hilbert == pytest.approx(closed.cos_max_hilbert, abs=1e-9)
