"""Tests for averaged projections, angle constants and convergence certificates."""
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from errors import HypothesisError, ProjectionError
from projection_lab import (
    NormedSpace,
    alpha_bound_from_cos,
    certificate_constants,
    certificate_to_json,
    commutator_ratio,
    commutator_ratio_bounds,
    cos_angle,
    e_functional,
    euclidean,
    family_from_json,
    friedrichs_cos,
    iterate_averaged,
    make_family,
    oblique_projection,
    op_norm,
    orthogonal_meet,
    orthogonal_projection,
    random_family,
    theorem_constants,
)

E = np.eye(3)


def line_projection(phi):
    return orthogonal_projection(np.array([[math.cos(phi)], [math.sin(phi)]]))


@pytest.fixture
def coordinate_planes():
    """P1 onto span{e1, e2}, P2 onto span{e2, e3}."""
    p1 = orthogonal_projection(E[:, [0, 1]])
    p2 = orthogonal_projection(E[:, [1, 2]])
    return p1, p2, orthogonal_projection(E[:, [1]])


def random_cases(count=50):
    """Seeded (dim, n) pairs with dims 5..20 and n in {2, 3, 4} that admit a family."""
    cases = []
    for k in range(count):
        dim, n = 5 + k % 16, 2 + k % 3
        while dim - max(1, dim // 4) < n + 1:
            n -= 1
        cases.append((k, dim, n))
    return cases


def e_values(family, vectors):
    """E evaluated on every column of ``vectors`` at once (Euclidean)."""
    total = np.zeros(vectors.shape[1])
    for i in range(family.n):
        for j in range(i + 1, family.n):
            total += np.linalg.norm((family.projections[i] - family.projections[j]) @ vectors, axis=0)
    return total


class TestNormedSpace:
    def test_weighted_norm(self):
        space = NormedSpace(dimension=2, norm_kind="weighted_2", weights=np.array([4.0, 1.0]))
        assert space.is_hilbert
        assert space.norm(np.array([1.0, 0.0])) == pytest.approx(2.0)

    def test_p_norm(self):
        space = NormedSpace(dimension=2, p=1.0)
        assert not space.is_hilbert
        assert space.norm(np.array([1.0, -2.0])) == pytest.approx(3.0)

    def test_bad_p(self):
        with pytest.raises(ProjectionError):
            NormedSpace(dimension=2, p=0.5)

    def test_bad_weights(self):
        with pytest.raises(ProjectionError):
            NormedSpace(dimension=2, norm_kind="weighted_2", weights=np.array([1.0, -1.0]))


class TestOpNorm:
    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
    def test_identity(self, p):
        assert op_norm(np.eye(3), NormedSpace(dimension=3, p=p)) == pytest.approx((1.0, 1.0))

    def test_diagonal_euclidean(self):
        assert op_norm(np.diag([3.0, 1.0]), euclidean(2)) == pytest.approx((3.0, 3.0))

    def test_column_sum_at_p_one(self):
        assert op_norm(np.array([[1.0, 1.0], [0.0, 0.0]]), NormedSpace(dimension=2, p=1.0)) == (1.0, 1.0)

    def test_weighted_uses_similarity(self):
        space = NormedSpace(dimension=2, norm_kind="weighted_2", weights=np.array([4.0, 1.0]))
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        # ||a v|| = 2 |v_2| while ||v|| >= |v_2|
        assert op_norm(a, space) == pytest.approx((2.0, 2.0))

    def test_bracket_contains_sampled_ratios(self):
        rng = np.random.default_rng(3)
        space = NormedSpace(dimension=4, p=3.0)
        for _ in range(5):
            a = rng.normal(size=(4, 4))
            lower, upper = op_norm(a, space, seed=1)
            assert lower <= upper + 1e-12
            samples = rng.normal(size=(4, 500))
            ratios = np.linalg.norm(a @ samples, ord=3, axis=0) / np.linalg.norm(samples, ord=3, axis=0)
            assert ratios.max() <= upper + 1e-12
            assert lower >= np.linalg.norm(a, ord=3, axis=0).max() - 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ProjectionError):
            op_norm(np.eye(2), euclidean(3))


class TestProjections:
    def test_oblique(self):
        p = oblique_projection(np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]]))
        np.testing.assert_allclose(p, [[1.0, -1.0], [0.0, 0.0]], atol=1e-12)

    def test_oblique_dimension_check(self):
        with pytest.raises(ProjectionError):
            oblique_projection(np.eye(3)[:, :2], np.eye(3)[:, :2])

    def test_orthogonal_meet(self, coordinate_planes):
        p1, p2, expected = coordinate_planes
        np.testing.assert_allclose(orthogonal_meet(p1, p2), expected, atol=1e-12)

    def test_no_orthogonal_meet_for_oblique_pair(self):
        oblique = np.array([[1.0, -1.0], [0.0, 0.0]])
        assert orthogonal_meet(oblique, np.diag([1.0, 0.0])) is None

    def test_friedrichs(self):
        assert friedrichs_cos(E[:, [0, 1]], E[:, [1, 2]]) == pytest.approx(0.0, abs=1e-12)
        lines = (np.array([[1.0], [0.0]]), np.array([[math.cos(0.3)], [math.sin(0.3)]]))
        assert friedrichs_cos(*lines) == pytest.approx(math.cos(0.3))


class TestAngles:
    def test_coordinate_planes(self, coordinate_planes):
        assert cos_angle(*coordinate_planes, euclidean(3)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("phi", [0.2, 0.7, 1.2])
    def test_lines(self, phi):
        p1, p2 = line_projection(0.0), line_projection(phi)
        assert cos_angle(p1, p2, np.zeros((2, 2)), euclidean(2)) == pytest.approx(math.cos(phi))

    def test_equal_projections(self, coordinate_planes):
        p1 = coordinate_planes[0]
        assert cos_angle(p1, p1, p1, euclidean(3)) == pytest.approx(0.0, abs=1e-12)

    def test_meet_must_absorb(self, coordinate_planes):
        p1, p2, _ = coordinate_planes
        with pytest.raises(ProjectionError) as info:
            cos_angle(p1, p2, np.eye(3), euclidean(3))
        assert info.value.code == "no_absorption"


class TestCommutatorRatio:
    def test_commuting(self, coordinate_planes):
        p1, p2, _ = coordinate_planes
        assert commutator_ratio(p1, p2, euclidean(3)) == 0.0

    def test_equal(self, coordinate_planes):
        assert commutator_ratio(coordinate_planes[0], coordinate_planes[0], euclidean(3)) == 0.0

    @pytest.mark.parametrize("phi", [0.3, 0.9])
    def test_lines_match_cosine(self, phi):
        p1, p2 = line_projection(0.0), line_projection(phi)
        value = commutator_ratio(p1, p2, euclidean(2))
        # [P1, P2] has norm sin cos and P1 - P2 has both singular values sin
        assert value == pytest.approx(math.cos(phi), abs=1e-9)
        assert value <= alpha_bound_from_cos(math.cos(phi), 1.0) + 1e-8

    def test_sampled_ratio_below_exact(self):
        p1, p2 = line_projection(0.0), line_projection(0.5)
        exact = commutator_ratio(p1, p2, euclidean(2))
        rng = np.random.default_rng(0)
        for v in rng.normal(size=(200, 2)):
            assert np.linalg.norm((p1 @ p2 - p2 @ p1) @ v) <= exact * np.linalg.norm((p1 - p2) @ v) + 1e-12

    def test_p_norm_bounds_ordered(self):
        space = NormedSpace(dimension=2, p=3.0)
        p1, p2 = line_projection(0.0), line_projection(1.0)
        lower, upper = commutator_ratio_bounds(p1, p2, space, np.zeros((2, 2)), seed=5)
        assert 0.0 < lower <= upper
        assert commutator_ratio_bounds(p1, p2, space, seed=5)[1] == math.inf

    def test_p_norm_commuting_pair_is_exact(self, coordinate_planes):
        p1, p2, _ = coordinate_planes
        assert commutator_ratio_bounds(p1, p2, NormedSpace(dimension=3, p=3.0)) == (0.0, 0.0)

    def test_alpha_bound_at_one(self):
        assert alpha_bound_from_cos(1.0, 1.0) == math.inf


class TestConstants:
    def test_certificate_examples(self):
        assert certificate_constants(0.0, 1.0, 2) == pytest.approx((0.5, 1.0))
        assert certificate_constants(0.0, 1.0, 3) == pytest.approx((2.0 / 3.0, 8.0 / 3.0))

    def test_certificate_alpha_boundary(self):
        with pytest.raises(HypothesisError) as info:
            certificate_constants(1.0, 1.0, 2)
        assert info.value.context["violated"] == "alpha < 1/(2N-3)"

    def test_certificate_beta_boundary(self):
        with pytest.raises(HypothesisError) as info:
            certificate_constants(0.0, 2.0, 3)
        assert "beta" in info.value.context["violated"]

    def test_theorem_examples(self):
        assert theorem_constants(0.0, 1.0, 2) == pytest.approx((0.5, 1.0))
        r, _ = theorem_constants(0.1, 1.0, 2)
        assert r == pytest.approx(13.0 / 18.0)

    def test_theorem_gamma_boundary(self):
        with pytest.raises(HypothesisError) as info:
            theorem_constants(0.2, 1.0, 2)
        assert info.value.context["violated"] == "gamma < 1/(8N-11)"

    def test_single_projection_rejected(self):
        with pytest.raises(HypothesisError):
            certificate_constants(0.0, 1.0, 1)


class TestEFunctional:
    def test_common_vector(self, coordinate_planes):
        family = make_family(euclidean(3), coordinate_planes[:2])
        assert e_functional(family, E[:, 1]) == 0.0

    def test_single_projection(self, coordinate_planes):
        family = make_family(euclidean(3), coordinate_planes[:1])
        assert e_functional(family, np.ones(3)) == 0.0

    def test_crude_bound(self):
        family = random_family(10, 3, seed=2, angle=0.002)
        v = np.random.default_rng(2).normal(size=10)
        assert e_functional(family, v) <= 2 * family.beta * 3 * np.linalg.norm(v) + 1e-12

    def test_dimension_check(self, coordinate_planes):
        with pytest.raises(ProjectionError):
            e_functional(make_family(euclidean(3), coordinate_planes[:2]), np.ones(2))


class TestIteration:
    def test_coordinate_planes_halve(self, coordinate_planes):
        family = make_family(euclidean(3), coordinate_planes[:2])
        cert = iterate_averaged(family, max_n=60)
        assert cert.mode == "certified" and cert.converged
        for n, measured in enumerate(cert.decay):
            assert measured == pytest.approx(2.0 ** -n, abs=1e-12)
        np.testing.assert_allclose(cert.t_infinity, coordinate_planes[2], atol=1e-12)
        assert (cert.limit_rank, cert.intersection_dim) == (1, 1)
        assert (cert.r_prime, cert.c_prime) == pytest.approx((0.5, 1.0))

    def test_fixed_vector_preserved(self):
        family = random_family(9, 3, seed=11, angle=0.002)
        v = family.pairwise_meets[(0, 1)] @ np.arange(9.0)
        t = family.averaged
        w = v.copy()
        for _ in range(20):
            w = t @ w
            np.testing.assert_allclose(w, v, atol=1e-10)

    def test_observe_only(self):
        lines = [line_projection(k * math.pi / 3) for k in range(3)]
        cert = iterate_averaged(make_family(euclidean(2), lines), max_n=80)
        assert cert.mode == "observe_only"
        assert cert.r is None and cert.r_prime is None
        assert cert.diagnostics
        np.testing.assert_allclose(cert.t_infinity, np.zeros((2, 2)), atol=1e-12)

    def test_converged_reports_last_step(self):
        lines = [line_projection(k * math.pi / 3) for k in range(3)]
        family = make_family(euclidean(2), lines)
        assert not iterate_averaged(family, max_n=3).converged
        cert = iterate_averaged(family, max_n=80)
        assert cert.converged
        assert cert.decay[-2] < 1e-10

    def test_p_norm_family_without_meets_has_no_commutator_route(self):
        space = NormedSpace(dimension=2, p=3.0)
        family = make_family(space, [line_projection(0.0), line_projection(1.2)], seed=5)
        assert family.pairwise_meets == {}
        assert math.isinf(family.alpha)
        cert = iterate_averaged(family, max_n=80)
        assert cert.mode == "observe_only"
        assert cert.r_prime is None and cert.r is None
        assert any("alpha" in reason for reason in cert.diagnostics)

    def test_non_convergence_raises(self, coordinate_planes):
        family = make_family(euclidean(3), coordinate_planes[:2])
        with pytest.raises(HypothesisError) as info:
            iterate_averaged(family, max_n=3)
        assert info.value.context["max_n"] == 3

    @pytest.mark.parametrize("seed,dim,n", random_cases())
    def test_random_family_soundness(self, seed, dim, n):
        family = random_family(dim, n, seed=seed, angle=0.002)
        assert family.cos_max is not None and family.cos_max < 1.0 / (8 * n - 11)
        cert = iterate_averaged(family, max_n=60)
        assert cert.mode == "certified" and cert.r is not None
        for k, measured in enumerate(cert.decay):
            assert measured <= cert.c * cert.r ** k + 1e-8
        assert cert.idempotence_error <= 1e-8
        assert cert.limit_rank == cert.intersection_dim
        assert family.alpha <= alpha_bound_from_cos(family.cos_max, family.beta) + 1e-8

    @pytest.mark.parametrize("seed,dim,n", random_cases()[::5])
    def test_e_decay(self, seed, dim, n):
        family = random_family(dim, n, seed=seed, angle=0.002)
        r_prime, _ = certificate_constants(family.alpha, family.beta, family.n)
        vectors = np.random.default_rng(seed).normal(size=(dim, 200))
        assert e_values(family, vectors[:, :1])[0] == pytest.approx(e_functional(family, vectors[:, 0]))
        start = e_values(family, vectors)
        moved = vectors
        for k in range(1, 31):
            moved = family.averaged @ moved
            assert np.all(e_values(family, moved) <= r_prime ** k * start * (1 + 1e-9) + 1e-15)

    def test_oblique_family(self):
        family = random_family(10, 3, seed=4, angle=0.002, skew=0.05)
        assert family.beta > 1.0
        cert = iterate_averaged(family)
        assert cert.mode == "certified"
        assert cert.max_violation <= 1e-8
        assert cert.containment_error <= 1e-8


class TestFamilies:
    def test_not_idempotent(self):
        with pytest.raises(ProjectionError) as info:
            make_family(euclidean(2), [2 * np.eye(2)])
        assert info.value.code == "not_idempotent"

    def test_meet_not_absorbing(self, coordinate_planes):
        p1, p2, _ = coordinate_planes
        with pytest.raises(ProjectionError) as info:
            make_family(euclidean(3), [p1, p2], {(0, 1): np.eye(3)})
        assert info.value.code == "no_absorption"

    def test_empty(self):
        with pytest.raises(ProjectionError):
            make_family(euclidean(2), [])

    def test_missing_meet_gives_no_cos(self):
        oblique = np.array([[1.0, -1.0], [0.0, 0.0]])
        family = make_family(euclidean(2), [oblique, np.diag([1.0, 0.0])])
        assert family.cos_max is None

    def test_random_family_too_small(self):
        with pytest.raises(ProjectionError):
            random_family(4, 4, seed=0)

    def test_random_family_is_seeded(self):
        a, b = random_family(8, 2, seed=9), random_family(8, 2, seed=9)
        for p, q in zip(a.projections, b.projections):
            np.testing.assert_array_equal(p, q)

    def test_from_json(self, coordinate_planes):
        p1, p2, meet = coordinate_planes
        family = family_from_json({
            "space": {"dim": 3, "p": 2},
            "projections": [p1.tolist(), p2.tolist()],
            "meets": {"0,1": meet.tolist()},
        })
        assert family.n == 2 and family.cos_max == pytest.approx(0.0, abs=1e-12)

    def test_from_json_infinity_norm(self):
        family = family_from_json({"space": {"dim": 2, "p": "inf"}, "projections": [np.eye(2).tolist()]})
        assert math.isinf(family.space.p)

    def test_from_json_malformed(self):
        with pytest.raises(ProjectionError) as info:
            family_from_json({"space": {"dim": 2}, "projections": [[[1.0]]]})
        assert info.value.code == "bad_family"

    def test_certificate_json(self, coordinate_planes):
        family = make_family(euclidean(3), coordinate_planes[:2])
        data = certificate_to_json(iterate_averaged(family), family)
        assert data["mode"] == "certified"
        assert data["n_projections"] == 2
        assert len(data["decay"]) == data["iterates_checked"] + 1
