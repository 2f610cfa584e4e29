"""Averaged projections on finite-dimensional normed spaces.

A family ``P_1 .. P_N`` of (possibly oblique) projections is averaged into
``T = (P_1 + ... + P_N) / N``. Small angles between the projections force
``T^n`` to converge at a geometric rate to a projection onto the common
image; this module measures the angles and commutator constants, turns them
into explicit rate constants and checks the rate against the actual powers.

Operator norms on p-normed spaces are only bracketed: ``op_norm`` returns a
``(lower, upper)`` interval, exact when ``p`` is 1, 2 or infinity. Every
inequality that feeds a certificate uses the upper end.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from constants import (
    BOUND_SLACK,
    IDEMPOTENT_TOL,
    ITERATION_TOL,
    POWER_ITERATION_RESTARTS,
    POWER_ITERATION_STEPS,
    RATIO_SEARCH_RESTARTS,
)
from errors import HypothesisError, ProjectionError
from seeding import make_rng, spawn_rngs

logger = logging.getLogger(__name__)

NormKind = Literal["p_norm", "weighted_2"]


@dataclass(frozen=True, eq=False)
class NormedSpace:
    """``R^dimension`` with a p-norm or a weighted 2-norm."""

    dimension: int
    norm_kind: NormKind = "p_norm"
    p: float = 2.0
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ProjectionError("Space dimension must be positive", code="bad_space")
        if not 1.0 <= self.p <= math.inf:
            raise ProjectionError(f"p must lie in [1, inf], got {self.p}", {"p": self.p}, code="bad_p")
        if self.norm_kind == "weighted_2":
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (self.dimension,) or np.any(w <= 0):
                raise ProjectionError("weighted_2 needs one positive weight per coordinate",
                                      code="bad_space")
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "p", 2.0)

    @property
    def is_hilbert(self) -> bool:
        return self.norm_kind == "weighted_2" or self.p == 2.0

    def _sqrt_weights(self) -> np.ndarray:
        if self.norm_kind == "weighted_2":
            return np.sqrt(self.weights)  # type: ignore[arg-type]
        return np.ones(self.dimension)

    def norm(self, v: np.ndarray) -> float:
        if self.norm_kind == "weighted_2":
            return float(np.linalg.norm(self._sqrt_weights() * v))
        return float(np.linalg.norm(v, ord=self.p))

    def to_euclidean(self, a: np.ndarray) -> np.ndarray:
        """Matrix of ``a`` in coordinates where the space is Euclidean (Hilbert spaces only)."""
        s = self._sqrt_weights()
        return s[:, None] * a / s[None, :]


def euclidean(dimension: int) -> NormedSpace:
    return NormedSpace(dimension=dimension)


def _check_square(a: np.ndarray, space: NormedSpace) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (space.dimension, space.dimension):
        raise ProjectionError(f"Expected a {space.dimension}x{space.dimension} matrix, got {a.shape}",
                              code="bad_shape")
    return a


def _dual_vector(y: np.ndarray, p: float) -> np.ndarray:
    """Unit vector in the dual norm attaining ``<dual, y> = ||y||_p``."""
    norm = np.linalg.norm(y, ord=p)
    if norm == 0:
        return np.zeros_like(y)
    return np.sign(y) * (np.abs(y) / norm) ** (p - 1.0)


def _power_lower_bound(a: np.ndarray, p: float, rng: np.random.Generator) -> float:
    """One restart of the nonlinear power method for ``||a||_p``."""
    q = p / (p - 1.0)
    x = rng.standard_normal(a.shape[1])
    x /= np.linalg.norm(x, ord=p)
    best = 0.0
    for _ in range(POWER_ITERATION_STEPS):
        y = a @ x
        best = max(best, float(np.linalg.norm(y, ord=p)))
        z = a.T @ _dual_vector(y, p)
        if np.linalg.norm(z, ord=q) <= z @ x + 1e-15:
            break
        x = _dual_vector(z, q)
        x /= np.linalg.norm(x, ord=p)
    return best


def op_norm(a: np.ndarray, space: NormedSpace, seed: Optional[int] = None,
            restarts: int = POWER_ITERATION_RESTARTS) -> Tuple[float, float]:
    """Interval ``(lower, upper)`` containing the operator norm of ``a`` on ``space``.

    Hilbert spaces get the largest singular value on both ends. For
    ``p = 1`` and ``p = inf`` the column/row sum norms are exact. Otherwise
    the lower end is the best of ``restarts`` nonlinear power iterations
    and the upper end the interpolation bound ``||a||_1^(1/p) ||a||_inf^(1-1/p)``.
    """
    a = _check_square(a, space)
    if space.is_hilbert:
        s = float(scipy.linalg.svdvals(space.to_euclidean(a))[0])
        return s, s
    col = float(np.abs(a).sum(axis=0).max())
    row = float(np.abs(a).sum(axis=1).max())
    if space.p == 1.0:
        return col, col
    if math.isinf(space.p):
        return row, row
    upper = col ** (1.0 / space.p) * row ** (1.0 - 1.0 / space.p)
    lower = max(float(np.linalg.norm(a[:, j], ord=space.p)) for j in range(space.dimension))
    for rng in spawn_rngs(seed, restarts):
        lower = max(lower, _power_lower_bound(a, space.p, rng))
    return min(lower, upper), upper


def is_projection(p: np.ndarray, tol: float = IDEMPOTENT_TOL) -> bool:
    return bool(np.max(np.abs(p @ p - p)) <= tol)


def _absorbs(meet: np.ndarray, p1: np.ndarray, p2: np.ndarray, tol: float = IDEMPOTENT_TOL) -> bool:
    return (is_projection(meet, tol)
            and np.max(np.abs(meet @ p1 - meet)) <= tol
            and np.max(np.abs(meet @ p2 - meet)) <= tol)


def orthogonal_projection(basis: np.ndarray, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Projection onto ``span(basis)``, orthogonal for the (weighted) inner product."""
    b = np.atleast_2d(np.asarray(basis, dtype=np.float64))
    dim = b.shape[0]
    if b.shape[1] == 0:
        return np.zeros((dim, dim))
    w = np.ones(dim) if weights is None else np.asarray(weights, dtype=np.float64)
    gram = b.T @ (w[:, None] * b)
    return b @ np.linalg.solve(gram, b.T * w[None, :])


def oblique_projection(range_basis: np.ndarray, kernel_basis: np.ndarray) -> np.ndarray:
    """Projection with the given image and kernel (complementary subspaces)."""
    r = np.atleast_2d(np.asarray(range_basis, dtype=np.float64))
    k = np.atleast_2d(np.asarray(kernel_basis, dtype=np.float64))
    if r.shape[1] + (k.shape[1] if k.size else 0) != r.shape[0]:
        raise ProjectionError("Image and kernel dimensions must add up to the space dimension",
                              code="bad_shape")
    annihilator = scipy.linalg.null_space(k.T) if k.size else np.eye(r.shape[0])
    return r @ np.linalg.solve(annihilator.T @ r, annihilator.T)


def common_image_basis(projections: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal basis of the intersection of all images."""
    dim = projections[0].shape[0]
    stacked = np.vstack([np.eye(dim) - p for p in projections])
    return scipy.linalg.null_space(stacked, rcond=1e-9)


def orthogonal_meet(p1: np.ndarray, p2: np.ndarray, weights: Optional[np.ndarray] = None
                    ) -> Optional[np.ndarray]:
    """Orthogonal projection onto ``Im p1 & Im p2`` if it absorbs both.

    Returns None when ``meet @ p1 == meet`` or ``meet @ p2 == meet`` fails,
    which happens for oblique projections whose kernels are not orthogonal
    to the intersection.
    """
    meet = orthogonal_projection(common_image_basis([p1, p2]), weights)
    return meet if _absorbs(meet, p1, p2, tol=1e-8) else None


def friedrichs_cos(u: np.ndarray, w: np.ndarray) -> float:
    """Cosine of the Friedrichs angle between ``span(u)`` and ``span(w)`` (Euclidean).

    Principal angles equal to zero come from ``U & W`` and are skipped.
    """
    u = scipy.linalg.orth(np.atleast_2d(u))
    w = scipy.linalg.orth(np.atleast_2d(w))
    shared = u.shape[1] + w.shape[1] - np.linalg.matrix_rank(np.hstack([u, w]), tol=1e-9)
    angles = np.sort(scipy.linalg.subspace_angles(u, w))
    rest = angles[shared:]
    return float(np.cos(rest[0])) if rest.size else 0.0


def cos_angle(p1: np.ndarray, p2: np.ndarray, p12: np.ndarray, space: NormedSpace,
              seed: Optional[int] = None) -> float:
    """``max(||P1 (P2 - P12)||, ||P2 (P1 - P12)||)``, upper estimate for general p.

    Raises:
        ProjectionError: If ``p12`` is not an idempotent absorbing both projections.
    """
    p1, p2, p12 = (_check_square(m, space) for m in (p1, p2, p12))
    if not _absorbs(p12, p1, p2):
        raise ProjectionError("P12 must be idempotent with P12 P1 = P12 = P12 P2", code="no_absorption")
    first = op_norm(p1 @ (p2 - p12), space, seed)[1]
    second = op_norm(p2 @ (p1 - p12), space, seed)[1]
    return max(first, second)


def alpha_bound_from_cos(cos: float, beta: float) -> float:
    """Upper bound ``2 (1 + beta) cos / (1 - cos)`` on the commutator constant."""
    if cos >= 1.0:
        return math.inf
    return 2.0 * (1.0 + beta) * cos / (1.0 - cos)


def _ratio_search(c: np.ndarray, d: np.ndarray, space: NormedSpace, seed: Optional[int]) -> float:
    def negative_ratio(v: np.ndarray) -> float:
        denominator = space.norm(d @ v)
        if denominator <= 1e-12 * max(1.0, space.norm(v)):
            return 0.0
        return -space.norm(c @ v) / denominator

    best = 0.0
    for rng in spawn_rngs(seed, RATIO_SEARCH_RESTARTS):
        start = rng.standard_normal(space.dimension)
        result = scipy.optimize.minimize(negative_ratio, start, method="Nelder-Mead",
                                         options={"maxiter": 400 * space.dimension, "xatol": 1e-10,
                                                  "fatol": 1e-12})
        best = max(best, -float(result.fun), -negative_ratio(start))
    return best


def commutator_ratio(p1: np.ndarray, p2: np.ndarray, space: NormedSpace,
                     seed: Optional[int] = None) -> float:
    """Smallest ``g`` with ``||(P1 P2 - P2 P1) v|| <= g ||(P1 - P2) v||`` for all ``v``.

    Exact on Hilbert spaces (``inf`` when the commutator does not vanish on
    ``ker(P1 - P2)``). For other p the value is a multi-start lower estimate;
    see :func:`commutator_ratio_bounds` for the matching upper bound.
    """
    p1, p2 = _check_square(p1, space), _check_square(p2, space)
    c = p1 @ p2 - p2 @ p1
    d = p1 - p2
    if np.max(np.abs(c)) <= IDEMPOTENT_TOL:
        return 0.0
    if not space.is_hilbert:
        return _ratio_search(c, d, space, seed)
    c, d = space.to_euclidean(c), space.to_euclidean(d)
    kernel = scipy.linalg.null_space(d, rcond=1e-10)
    if kernel.size and np.max(np.abs(c @ kernel)) > 1e-9:
        return math.inf
    complement = scipy.linalg.orth(d.T, rcond=1e-10)
    cc = complement.T @ c.T @ c @ complement
    dd = complement.T @ d.T @ d @ complement
    top = float(scipy.linalg.eigh(cc, dd, eigvals_only=True)[-1])
    return math.sqrt(max(top, 0.0))


def commutator_ratio_bounds(p1: np.ndarray, p2: np.ndarray, space: NormedSpace,
                            p12: Optional[np.ndarray] = None, seed: Optional[int] = None
                            ) -> Tuple[float, float]:
    """``(lower, upper)`` for the commutator constant.

    The upper end comes from the angle when a meet projection is supplied.
    """
    value = commutator_ratio(p1, p2, space, seed)
    if space.is_hilbert or np.max(np.abs(p1 @ p2 - p2 @ p1)) <= IDEMPOTENT_TOL:
        return value, value
    if p12 is None:
        return value, math.inf
    beta = max(op_norm(p1, space, seed)[1], op_norm(p2, space, seed)[1])
    return value, alpha_bound_from_cos(cos_angle(p1, p2, p12, space, seed), beta)


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    """Projections ``P_1 .. P_N`` on ``space`` with optional meets ``P_ij`` (0-based ``i < j``)."""

    space: NormedSpace
    projections: Tuple[np.ndarray, ...]
    pairwise_meets: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return len(self.projections)

    @cached_property
    def averaged(self) -> np.ndarray:
        """The averaged operator ``T``."""
        return sum(self.projections) / self.n  # type: ignore[return-value]

    @cached_property
    def beta(self) -> float:
        return max(op_norm(p, self.space, self.seed)[1] for p in self.projections)

    @cached_property
    def alpha(self) -> float:
        """Upper bound on the largest pairwise commutator constant; ``inf`` when none is known."""
        values = [commutator_ratio_bounds(self.projections[i], self.projections[j], self.space,
                                          self.pairwise_meets.get((i, j)), self.seed)[1]
                  for i in range(self.n) for j in range(i + 1, self.n)]
        return max(values, default=0.0)

    @cached_property
    def angles(self) -> Dict[Tuple[int, int], float]:
        return {pair: cos_angle(self.projections[pair[0]], self.projections[pair[1]], meet,
                                self.space, self.seed)
                for pair, meet in sorted(self.pairwise_meets.items())}

    @cached_property
    def cos_max(self) -> Optional[float]:
        """Largest pairwise angle, or None when some meet is missing."""
        if len(self.pairwise_meets) < self.n * (self.n - 1) // 2:
            return None
        return max(self.angles.values(), default=0.0)


def make_family(space: NormedSpace, projections: Sequence[np.ndarray],
                meets: Optional[Mapping[Tuple[int, int], np.ndarray]] = None,
                seed: Optional[int] = None) -> ProjectionFamily:
    """Validate projections and meets; synthesize orthogonal meets on Hilbert spaces.

    Raises:
        ProjectionError: On a non-idempotent projection or a meet that does not absorb.
    """
    mats = tuple(_check_square(p, space).copy() for p in projections)
    if not mats:
        raise ProjectionError("A family needs at least one projection", code="empty_family")
    for index, p in enumerate(mats):
        if not is_projection(p):
            raise ProjectionError(f"P_{index + 1} is not idempotent", {"index": index},
                                  code="not_idempotent")
        p.setflags(write=False)
    supplied: Dict[Tuple[int, int], np.ndarray] = {}
    for (i, j), meet in (meets or {}).items():
        meet = _check_square(meet, space)
        if not _absorbs(meet, mats[i], mats[j]):
            raise ProjectionError(f"Meet P_{i + 1},{j + 1} does not absorb both projections",
                                  {"pair": [i, j]}, code="no_absorption")
        supplied[(min(i, j), max(i, j))] = meet
    if space.is_hilbert:
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                if (i, j) in supplied:
                    continue
                meet = orthogonal_meet(mats[i], mats[j], space.weights)
                if meet is not None:
                    supplied[(i, j)] = meet
                else:
                    logger.debug("No absorbing orthogonal meet for pair (%d, %d)", i, j)
    return ProjectionFamily(space=space, projections=mats, pairwise_meets=supplied, seed=seed)


def e_functional(family: ProjectionFamily, v: np.ndarray) -> float:
    """``E(v) = sum_{i<j} ||(P_i - P_j) v||``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (family.space.dimension,):
        raise ProjectionError("Vector dimension does not match the space", code="bad_shape")
    total = 0.0
    for i in range(family.n):
        for j in range(i + 1, family.n):
            total += family.space.norm((family.projections[i] - family.projections[j]) @ v)
    return total


def certificate_constants(alpha: float, beta: float, n: int) -> Tuple[float, float]:
    """Rate ``r'`` and constant ``C'`` from the commutator constant ``alpha``.

    ``r' = (1 + (N-2) beta + (2N-3) alpha) / N`` and
    ``C' = (N-1) 2 beta^2 / N * r' / (1 - r')``.

    Raises:
        HypothesisError: Unless ``alpha < 1/(2N-3)`` and, for ``N > 2``,
            ``beta < (N - 1 - (2N-3) alpha) / (N - 2)``.
    """
    if n < 2:
        raise HypothesisError(f"Need at least two projections, got N = {n}", {"n": n})
    alpha_limit = 1.0 / (2 * n - 3)
    if not alpha < alpha_limit:
        raise HypothesisError(f"alpha = {alpha} is not below 1/(2N-3) = {alpha_limit}",
                              {"violated": "alpha < 1/(2N-3)", "alpha": alpha, "limit": alpha_limit})
    if n > 2:
        beta_limit = (n - 1 - (2 * n - 3) * alpha) / (n - 2)
        if not beta < beta_limit:
            raise HypothesisError(f"beta = {beta} is not below {beta_limit}",
                                  {"violated": "beta < (N-1-(2N-3)alpha)/(N-2)", "beta": beta,
                                   "limit": beta_limit})
    r_prime = (1.0 + (n - 2) * beta + (2 * n - 3) * alpha) / n
    c_prime = (n - 1) * 2.0 * beta ** 2 / n * r_prime / (1.0 - r_prime)
    return r_prime, c_prime


def theorem_constants(gamma: float, beta: float, n: int) -> Tuple[float, float]:
    """Rate and constant from the angle bound ``gamma``.

    Sets ``alpha = 2 (1 + beta) gamma / (1 - gamma)`` and delegates to
    :func:`certificate_constants`.

    Raises:
        HypothesisError: Unless ``gamma < 1/(8N-11)`` and
            ``beta < 1 + (1 - (8N-11) gamma) / (N - 2 + (3N-4) gamma)``.
    """
    if n < 2:
        raise HypothesisError(f"Need at least two projections, got N = {n}", {"n": n})
    gamma_limit = 1.0 / (8 * n - 11)
    if not gamma < gamma_limit:
        raise HypothesisError(f"gamma = {gamma} is not below 1/(8N-11) = {gamma_limit}",
                              {"violated": "gamma < 1/(8N-11)", "gamma": gamma, "limit": gamma_limit})
    denominator = n - 2 + (3 * n - 4) * gamma
    beta_limit = math.inf if denominator == 0 else 1.0 + (1.0 - (8 * n - 11) * gamma) / denominator
    if not beta < beta_limit:
        raise HypothesisError(f"beta = {beta} is not below {beta_limit}",
                              {"violated": "beta < 1 + (1-(8N-11)gamma)/(N-2+(3N-4)gamma)",
                               "beta": beta, "limit": beta_limit})
    alpha = 2.0 * (1.0 + beta) * gamma / (1.0 - gamma)
    return certificate_constants(alpha, beta, n)


@dataclass(frozen=True, eq=False)
class ConvergenceCertificate:
    """Outcome of iterating the averaged operator.

    ``mode`` is ``"certified"`` when at least one set of rate constants is
    available, else ``"observe_only"`` (no uniform-rate claim is made).
    ``decay[n]`` is the measured ``||T_inf - T^n||``.
    """

    mode: str
    r_prime: Optional[float]
    c_prime: Optional[float]
    r: Optional[float]
    c: Optional[float]
    t_infinity: np.ndarray
    iterates_checked: int
    max_violation: float
    converged: bool
    decay: Tuple[float, ...]
    idempotence_error: float
    containment_error: float
    limit_rank: int
    intersection_dim: int
    diagnostics: Tuple[str, ...] = ()


def _try(constants_fn, *args) -> Tuple[Optional[Tuple[float, float]], Optional[str]]:
    try:
        return constants_fn(*args), None
    except HypothesisError as e:
        return None, e.message


def iterate_averaged(family: ProjectionFamily, max_n: int = 60, tol: float = ITERATION_TOL,
                     slack: float = BOUND_SLACK) -> ConvergenceCertificate:
    """Iterate ``T^n`` by plain products and check it against the rate constants.

    ``T_inf`` is ``T^max_n``; the run counts as converged when the last
    step ``||T^max_n - T^(max_n - 1)||`` is below ``tol``. In certified mode every checked ``n`` must satisfy
    ``||T_inf - T^n|| <= C r^n + slack`` for each available ``(r, C)``.

    Raises:
        HypothesisError: In certified mode, on non-convergence within
            ``max_n`` or a violated rate bound.
    """
    space = family.space
    diagnostics: List[str] = []
    lemma, why_lemma = _try(certificate_constants, family.alpha, family.beta, family.n)
    theorem: Optional[Tuple[float, float]] = None
    why_theorem = "no meet projections for every pair"
    if family.cos_max is not None:
        theorem, why_theorem = _try(theorem_constants, family.cos_max, family.beta, family.n)
    for reason in (why_lemma, why_theorem):
        if reason:
            diagnostics.append(reason)
    mode = "certified" if (lemma or theorem) else "observe_only"
    if mode == "observe_only":
        logger.warning("No uniform-rate certificate: %s", "; ".join(diagnostics))

    t = family.averaged
    powers = [np.eye(space.dimension)]
    converged = False
    for _ in range(max_n):
        following = powers[-1] @ t
        if not np.all(np.isfinite(following)):
            logger.warning("T^n overflowed after %d steps", len(powers) - 1)
            converged = False
            break
        powers.append(following)
        # the last step decides
        converged = op_norm(powers[-1] - powers[-2], space, family.seed)[1] < tol
    t_inf = powers[-1]
    decay = tuple(op_norm(t_inf - power, space, family.seed)[1] for power in powers)

    max_violation = -math.inf
    for constants in (lemma, theorem):
        if constants is None:
            continue
        rate, const = constants
        for n, measured in enumerate(decay):
            max_violation = max(max_violation, measured - const * rate ** n)
    if max_violation == -math.inf:
        max_violation = 0.0

    common = common_image_basis(family.projections)
    certificate = ConvergenceCertificate(
        mode=mode,
        r_prime=lemma[0] if lemma else None,
        c_prime=lemma[1] if lemma else None,
        r=theorem[0] if theorem else None,
        c=theorem[1] if theorem else None,
        t_infinity=t_inf,
        iterates_checked=len(powers) - 1,
        max_violation=float(max_violation),
        converged=converged,
        decay=decay,
        idempotence_error=float(np.max(np.abs(t_inf @ t_inf - t_inf))),
        containment_error=float(max(np.max(np.abs(p @ t_inf - t_inf)) for p in family.projections)),
        limit_rank=int(np.linalg.matrix_rank(t_inf, tol=1e-6)),
        intersection_dim=int(common.shape[1]),
        diagnostics=tuple(diagnostics),
    )
    if mode == "certified":
        if not converged:
            raise HypothesisError(f"T^n did not converge within {max_n} iterations",
                                  {"violated": "||T^(n+1) - T^n|| < tol", "max_n": max_n,
                                   "last_step": decay[-2] if len(decay) > 1 else None})
        if max_violation > slack:
            raise HypothesisError(f"Rate bound exceeded by {max_violation:.3e}",
                                  {"violated": "||T_inf - T^n|| <= C r^n", "excess": max_violation})
    return certificate


def random_family(dim: int, n: int, seed: Optional[int] = None, angle: float = 0.01,
                  skew: float = 0.0, common_dim: Optional[int] = None) -> ProjectionFamily:
    """Seeded family of ``n`` projections sharing a common subspace.

    Each image is the common subspace plus its own block of directions,
    nudged towards the other blocks by ``angle`` so the Friedrichs angles
    are small but nonzero. ``skew > 0`` conjugates everything by
    ``I + skew * G`` (``G`` a random unit-norm matrix), giving oblique
    projections with matching oblique meets.
    """
    rng = make_rng(seed)
    common = common_dim if common_dim is not None else max(1, dim // 4)
    block = (dim - common) // (n + 1)
    if block < 1:
        raise ProjectionError(f"dim {dim} too small for {n} projections", code="bad_shape")
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    base = q[:, :common]
    blocks = [q[:, common + i * block: common + (i + 1) * block] for i in range(n)]
    images = []
    for i in range(n):
        others = np.hstack([blocks[j] for j in range(n) if j != i]) if n > 1 else np.zeros((dim, 0))
        mix = rng.standard_normal((others.shape[1], block)) / max(1, others.shape[1]) ** 0.5
        nudged = blocks[i] + angle * (others @ mix)
        images.append(np.hstack([base, nudged]))
    projections = [orthogonal_projection(image) for image in images]
    meet = orthogonal_projection(base)
    if skew > 0:
        g = rng.standard_normal((dim, dim))
        s = np.eye(dim) + skew * g / np.linalg.norm(g, 2)
        s_inv = np.linalg.inv(s)
        projections = [s @ p @ s_inv for p in projections]
        meet = s @ meet @ s_inv
    meets = {(i, j): meet for i in range(n) for j in range(i + 1, n)}
    return make_family(euclidean(dim), projections, meets, seed=seed)


def family_from_json(data: Mapping[str, Any], seed: Optional[int] = None) -> ProjectionFamily:
    """Build a family from ``{space, projections, meets?}`` (meet keys ``"i,j"``, 0-based)."""
    from pydantic import ValidationError

    from pydantic_models import FamilyModel

    try:
        model = FamilyModel.model_validate(data)
    except ValidationError as e:
        raise ProjectionError(f"Malformed family JSON: {e.errors()[0]['msg']}", code="bad_family") from e
    if model.space.weights is not None:
        space = NormedSpace(dimension=model.space.dim, norm_kind="weighted_2",
                            weights=np.asarray(model.space.weights))
    else:
        space = NormedSpace(dimension=model.space.dim, p=model.space.p)
    meets = {}
    for key, matrix in (model.meets or {}).items():
        i, j = (int(part) for part in key.split(","))
        meets[(i, j)] = np.asarray(matrix, dtype=np.float64)
    return make_family(space, [np.asarray(p, dtype=np.float64) for p in model.projections], meets, seed)


def certificate_to_json(cert: ConvergenceCertificate, family: ProjectionFamily) -> Dict[str, Any]:
    return {
        "mode": cert.mode,
        "n_projections": family.n,
        "dimension": family.space.dimension,
        "p": family.space.p,
        "beta": family.beta,
        "alpha": family.alpha,
        "cos_max": family.cos_max,
        "r_prime": cert.r_prime,
        "c_prime": cert.c_prime,
        "r": cert.r,
        "c": cert.c,
        "iterates_checked": cert.iterates_checked,
        "converged": cert.converged,
        "max_violation": cert.max_violation,
        "decay": list(cert.decay),
        "idempotence_error": cert.idempotence_error,
        "containment_error": cert.containment_error,
        "limit_rank": cert.limit_rank,
        "intersection_dim": cert.intersection_dim,
        "t_infinity": cert.t_infinity.tolist(),
        "diagnostics": list(cert.diagnostics),
    }
