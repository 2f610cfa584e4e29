"""Verdicts and constants for robust Banach property (T).

A group generated by subgroups ``K_1 .. K_N`` is certified when the
largest pairwise Hilbert angle stays strictly below ``1/(8N-11)``. From
that angle and a chosen ``c'`` in ``[cos, threshold)`` this module derives
the decay constants ``s1, s2, s0``, the Banach classes the certificate
reaches (Banach-Mazur balls around Hilbert space, theta-Hilbertian spaces,
and type/cotype interpolation classes through the Schatten data) and the
range of ``p`` for which fixed point property ``F_{L^p}`` follows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

from constants import DEFAULT_P1_GRID, DEFAULT_P2_GRID, DEFAULT_R_GRID
from coset_spectra import AngleReport, LinkTable, exponent_key
from errors import CriterionError
from finite_group import is_prime

logger = logging.getLogger(__name__)

PairKind = Literal["commuting", "heisenberg", "explicit", "link"]


@dataclass(frozen=True)
class PairData:
    """What is known about the pair ``(K_i, K_j)``."""

    kind: PairKind
    q: Optional[int] = None
    hilbert_cos: Optional[float] = None
    schatten: Dict[float, float] = field(default_factory=dict)
    eta2: Optional[float] = None
    v1_size: Optional[int] = None
    v2_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind == "heisenberg":
            if self.q is None or not is_prime(self.q):
                raise CriterionError(f"Heisenberg pairs need a prime q, got {self.q}", code="not_prime")
        elif self.kind == "explicit":
            if self.hilbert_cos is None or not 0.0 <= self.hilbert_cos <= 1.0:
                raise CriterionError("Explicit pairs need hilbert_cos in [0, 1]", code="bad_pair")
        elif self.kind == "link":
            if self.eta2 is None or not 0.0 < self.eta2 < 2.0 or not self.v1_size or not self.v2_size:
                raise CriterionError("Link pairs need eta2 in (0, 2) and both side sizes", code="bad_pair")

    @classmethod
    def commuting(cls) -> "PairData":
        return cls("commuting")

    @classmethod
    def heisenberg(cls, q: int) -> "PairData":
        return cls("heisenberg", q=q)

    @classmethod
    def explicit(cls, report: AngleReport) -> "PairData":
        return cls("explicit", hilbert_cos=report.hilbert_cos, schatten=dict(report.schatten),
                   eta2=report.eta2, v1_size=report.v1_size, v2_size=report.v2_size)

    def cos(self) -> float:
        if self.kind == "commuting":
            return 0.0
        if self.kind == "heisenberg":
            return 1.0 / math.sqrt(self.q)  # type: ignore[arg-type]
        if self.kind == "explicit":
            return float(self.hilbert_cos)  # type: ignore[arg-type]
        return max(0.0, 1.0 - float(self.eta2))  # type: ignore[arg-type]

    def schatten_at(self, r: float, link_side: int = 1) -> Optional[float]:
        """Schatten r-norm bound for this pair, or None when unknown."""
        if self.kind == "commuting":
            return 0.0
        if self.kind == "heisenberg":
            q = float(self.q)  # type: ignore[arg-type]
            return (q * q - q) ** (1.0 / r) / math.sqrt(q)
        if self.kind == "explicit":
            return self.schatten.get(float(r))
        return self.cos() * link_side ** (1.0 / r)


@dataclass(frozen=True)
class GeneratorScheme:
    """Pair data for every ``1 <= i < j <= n_generators``.

    ``link_rank`` is set for schemes built from links of a building-like
    complex, where ``N = link_rank + 1``.
    """

    n_generators: int
    pair_data: Dict[Tuple[int, int], PairData]
    name: str = "scheme"
    link_rank: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_generators < 2:
            raise CriterionError(f"Need N >= 2 generators, got {self.n_generators}", code="bad_scheme")
        expected = {(i, j) for i in range(1, self.n_generators + 1)
                    for j in range(i + 1, self.n_generators + 1)}
        missing = sorted(expected - set(self.pair_data))
        extra = sorted(set(self.pair_data) - expected)
        if missing or extra:
            raise CriterionError(f"Scheme pairs do not match N = {self.n_generators}",
                                 {"missing": [list(p) for p in missing], "unexpected": [list(p) for p in extra]},
                                 code="missing_pairs")

    def heisenberg_primes(self) -> List[int]:
        return sorted({d.q for d in self.pair_data.values() if d.kind == "heisenberg"})  # type: ignore[misc]

    @property
    def shared_q(self) -> Optional[int]:
        """The common prime when every non-commuting pair is Heisenberg over it."""
        kinds = {d.kind for d in self.pair_data.values()}
        primes = self.heisenberg_primes()
        if kinds <= {"commuting", "heisenberg"} and len(primes) == 1:
            return primes[0]
        return None

    @property
    def link_side(self) -> int:
        sides = [min(d.v1_size, d.v2_size) for d in self.pair_data.values()  # type: ignore[type-var]
                 if d.kind == "link"]
        return max(sides, default=1)


@dataclass(frozen=True)
class BanachClassDescriptor:
    """One Banach class reached by a certificate.

    ``kind`` is ``hilbert_bm_ball`` (params ``delta``), ``theta_hilbertian``
    (``theta``) or ``type_cotype`` (``p1, p2, r, T, C, theta_min``).
    """

    kind: Literal["hilbert_bm_ball", "theta_hilbertian", "type_cotype"]
    params: Dict[str, float]
    provenance: str

    def __post_init__(self) -> None:
        if self.kind == "hilbert_bm_ball" and self.params["delta"] < 0:
            raise CriterionError("Banach-Mazur radius must be non-negative", code="bad_class")
        if self.kind in ("theta_hilbertian", "type_cotype"):
            theta = self.params["theta" if self.kind == "theta_hilbertian" else "theta_min"]
            if not 0.0 < theta <= 1.0 + 1e-15:
                raise CriterionError(f"theta = {theta} outside (0, 1]", code="bad_class")
        if self.kind == "type_cotype":
            p1, p2 = self.params["p1"], self.params["p2"]
            if not (1.0 < p1 <= 2.0 <= p2 < math.inf) or self.params["T"] < 1 or self.params["C"] < 1:
                raise CriterionError("Type/cotype parameters out of range", dict(self.params),
                                     code="bad_class")


@dataclass(frozen=True)
class CriterionOptions:
    epsilon: Optional[float] = None
    c_prime: Optional[float] = None
    r_grid: Tuple[float, ...] = DEFAULT_R_GRID
    p1_grid: Tuple[float, ...] = DEFAULT_P1_GRID
    p2_grid: Tuple[float, ...] = DEFAULT_P2_GRID
    type_constant: float = 1.0
    cotype_constant: float = 1.0


@dataclass(frozen=True)
class CriterionReport:
    """Verdict with the full inequality chain behind it.

    ``epsilon``, ``s1``, ``s2``, ``s0``, ``c_prime`` and ``flp_exponent``
    are None unless certified. ``zero_angle`` marks all-commuting schemes,
    where every class is admissible and no class parameters are computed.
    """

    scheme_name: str
    n_generators: int
    threshold: float
    cos_max_hilbert: float
    schatten_max: Dict[float, float]
    verdict: Literal["certified", "not_certified"]
    epsilon: Optional[float]
    s1: Optional[float]
    s2: Optional[float]
    s0: Optional[float]
    c_prime: Optional[float]
    class_params: Tuple[BanachClassDescriptor, ...]
    type_cotype_grid: Tuple[Dict[str, Any], ...]
    flp_exponent: Optional[float]
    zero_angle: bool = False
    failed_inequalities: Tuple[str, ...] = ()


def threshold(n: int) -> float:
    """``1/(8N-11)``, the largest admissible angle for ``N`` generators."""
    if n < 2:
        raise CriterionError(f"Need N >= 2, got {n}", {"n": n}, code="bad_n")
    return 1.0 / (8 * n - 11)


def s_constants(epsilon: float, n: int) -> Tuple[float, float, float]:
    """``(s1, s2, s0)`` for slack ``epsilon`` and ``N`` generators."""
    if not 0.0 < epsilon < 1.0:
        raise CriterionError(f"epsilon must lie in (0, 1), got {epsilon}", {"epsilon": epsilon},
                             code="bad_epsilon")
    threshold(n)
    s1 = math.log(1.0 + epsilon / (2.0 * (1.0 - epsilon))) / 2.0
    s2 = math.log(1.0 + 1.0 / (8.0 * n))
    return s1, s2, min(s1, s2)


def class_params(c: float, c_prime: float) -> Tuple[float, float]:
    """``(delta, theta)`` with ``delta = c'/c - 1`` and ``2 (c/2)^theta = c'``."""
    if not (0.0 < c <= c_prime < 2.0):
        raise CriterionError(f"Need 0 < c <= c' < 2, got c = {c}, c' = {c_prime}",
                             {"c": c, "c_prime": c_prime}, code="bad_ordering")
    delta = c_prime / c - 1.0
    theta = (math.log(2.0) - math.log(c_prime)) / (math.log(2.0) - math.log(c))
    return delta, theta


def heisenberg_class_params(q: int, c_prime: float) -> Tuple[float, float]:
    """``delta = c' sqrt(q) - 1`` and ``theta = (ln 2 - ln c') / (ln 2 + ln sqrt(q))``."""
    if not is_prime(q):
        raise CriterionError(f"q = {q} is not prime", code="not_prime")
    return class_params(1.0 / math.sqrt(q), c_prime)


def lp_interval(theta: float) -> Tuple[float, float]:
    """Exponents ``p`` whose ``L^p`` is theta'-Hilbertian with ``theta' >= theta``."""
    if not 0.0 < theta <= 1.0:
        raise CriterionError(f"theta must lie in (0, 1], got {theta}", code="bad_theta")
    return 2.0 / (2.0 - theta), 2.0 / theta


def _check_interpolation_triple(p1: float, p2: float, r: float) -> float:
    if not (1.0 < p1 <= 2.0 <= p2 < math.inf):
        raise CriterionError(f"Need 1 < p1 <= 2 <= p2 < inf, got p1 = {p1}, p2 = {p2}",
                             code="bad_exponents")
    if not 2.0 <= r < math.inf:
        raise CriterionError(f"Need r in [2, inf), got {r}", code="bad_exponents")
    gap = 1.0 / p1 - 1.0 / p2 - 1.0 / r
    if gap >= 0:
        raise CriterionError(f"1/p1 - 1/p2 = {1.0 / p1 - 1.0 / p2} is not below 1/r = {1.0 / r}",
                             {"p1": p1, "p2": p2, "r": r}, code="divergent")
    return gap


def schatten_M(p1: float, p2: float, r: float) -> float:
    """Closed form of ``sum_{i>=1} x^i`` with ``x = 2^((r/(r-1)) (1/p1 - 1/p2 - 1/r))``."""
    gap = _check_interpolation_triple(p1, p2, r)
    x = 2.0 ** (r / (r - 1.0) * gap)
    return x / (1.0 - x)


def schatten_transfer_bound(schatten_norm: float, p1: float, p2: float, r: float,
                            type_constant: float = 1.0, cotype_constant: float = 1.0) -> float:
    """Norm bound on type ``p1`` / cotype ``p2`` spaces from a Schatten r-norm."""
    return schatten_M(p1, p2, r) * type_constant * cotype_constant * schatten_norm


def smallest_certifying_prime(n: int) -> int:
    """Least prime ``q`` with ``q > (8N-11)^2``."""
    q = (8 * n - 11) ** 2 + 1
    threshold(n)
    while not is_prime(q):
        q += 1
    return q


def steinberg_pair_kind(i: int, j: int, n: int, m: int) -> PairKind:
    """Case table for the subgroups ``K_1 .. K_{n+m}`` of ``St_n(F_q[t_1..t_m])``."""
    if 1 <= i < j < n and j - i > 1:
        return "commuting"
    if 1 < i < n - 1 and n <= j <= n + m:
        return "commuting"
    if n <= i < j <= n + m:
        return "commuting"
    if 1 <= i < n - 1 and j == i + 1:
        return "heisenberg"
    if i == 1 and n <= j <= n + m:
        return "heisenberg"
    if i == n - 1 and n <= j <= n + m:
        return "heisenberg"
    raise CriterionError(f"Pair ({i}, {j}) not covered for n = {n}, m = {m}", code="bad_pair")


def steinberg_scheme(n: int, m: int, q: int) -> GeneratorScheme:
    """Scheme of ``St_n(F_q[t_1..t_m])`` with ``N = n + m`` order-``q`` generators."""
    if n < 3 or m < 1:
        raise CriterionError(f"Need n >= 3 and m >= 1, got n = {n}, m = {m}", code="bad_parameters")
    if not is_prime(q):
        raise CriterionError(f"q = {q} is not prime", {"q": q}, code="not_prime")
    total = n + m
    pairs = {}
    for i in range(1, total + 1):
        for j in range(i + 1, total + 1):
            kind = steinberg_pair_kind(i, j, n, m)
            pairs[(i, j)] = PairData.heisenberg(q) if kind == "heisenberg" else PairData.commuting()
    return GeneratorScheme(n_generators=total, pair_data=pairs, name=f"steinberg-{n}-{m}-{q}")


def kms_scheme(n_vertices: int, edges: Iterable[Sequence[int]], q: int) -> GeneratorScheme:
    """Kac-Moody-Steinberg scheme: Heisenberg on edges, commuting elsewhere (1-based vertices)."""
    if not is_prime(q):
        raise CriterionError(f"q = {q} is not prime", {"q": q}, code="not_prime")
    edge_set = set()
    for edge in edges:
        a, b = int(edge[0]), int(edge[1])
        if a == b:
            raise CriterionError(f"Loop at vertex {a}", {"edge": [a, b]}, code="bad_graph")
        if not (1 <= a <= n_vertices and 1 <= b <= n_vertices):
            raise CriterionError(f"Edge ({a}, {b}) leaves the vertex set", {"edge": [a, b]}, code="bad_graph")
        key = (min(a, b), max(a, b))
        if key in edge_set:
            raise CriterionError(f"Repeated edge {key}", {"edge": list(key)}, code="bad_graph")
        edge_set.add(key)
    pairs = {(i, j): PairData.heisenberg(q) if (i, j) in edge_set else PairData.commuting()
             for i in range(1, n_vertices + 1) for j in range(i + 1, n_vertices + 1)}
    return GeneratorScheme(n_generators=n_vertices, pair_data=pairs, name=f"kms-{n_vertices}-{q}")


def link_scheme(links: LinkTable, n: int) -> GeneratorScheme:
    """Scheme of a group acting on an ``n``-dimensional complex; links cover all pairs of ``N = n + 1``."""
    pairs = {}
    for entry in links.entries:
        pairs[entry.pair] = PairData("link", eta2=entry.eta2, v1_size=entry.v1_size, v2_size=entry.v2_size)
    return GeneratorScheme(n_generators=n + 1, pair_data=pairs, name=f"links-{n}", link_rank=n)


def _pair_from_model(model: Any) -> PairData:
    schatten = {float(k): float(v) for k, v in (model.schatten or {}).items()}
    return PairData(model.kind, q=model.q, hilbert_cos=model.hilbert_cos, schatten=schatten,
                    eta2=model.eta2, v1_size=model.v1_size, v2_size=model.v2_size)


def scheme_from_json(data: Mapping[str, Any], name: str = "scheme") -> GeneratorScheme:
    """Build a scheme from ``{n_generators, pairs: [...], link_rank?}``."""
    from pydantic import ValidationError

    from pydantic_models import SchemeModel

    try:
        model = SchemeModel.model_validate(data)
    except ValidationError as e:
        raise CriterionError(f"Malformed scheme: {e.errors()[0]['msg']}", code="malformed_scheme") from e
    pairs = {}
    for pair in model.pairs:
        key = (pair.pair[0], pair.pair[1])
        if key in pairs:
            raise CriterionError(f"Pair {key} listed twice", code="malformed_scheme")
        pairs[key] = _pair_from_model(pair)
    return GeneratorScheme(n_generators=model.n_generators, pair_data=pairs, name=name,
                           link_rank=model.link_rank)


def _choose_c_prime(cos_bound: float, limit: float, requested: Optional[float]) -> float:
    if requested is None:
        return (cos_bound + limit) / 2.0
    if not cos_bound <= requested < limit:
        raise CriterionError(f"c' = {requested} must lie in [{cos_bound}, {limit})",
                             {"c_prime": requested, "cos": cos_bound, "threshold": limit},
                             code="bad_c_prime")
    return requested


def _type_cotype_grid(schatten_max: Mapping[float, float], c_prime: float,
                      options: CriterionOptions) -> Tuple[List[Dict[str, Any]], List[BanachClassDescriptor]]:
    rows: List[Dict[str, Any]] = []
    classes: List[BanachClassDescriptor] = []
    scale = options.type_constant * options.cotype_constant
    for r in options.r_grid:
        if r not in schatten_max:
            continue
        for p1 in options.p1_grid:
            for p2 in options.p2_grid:
                if 1.0 / p1 - 1.0 / p2 >= 1.0 / r:
                    continue
                c = schatten_M(p1, p2, r) * schatten_max[r]
                member = 0.0 < c * scale <= c_prime
                rows.append({"p1": p1, "p2": p2, "r": r, "c": c, "member": member})
                if member:
                    theta_min = (math.log(2.0) - math.log(c_prime)) / (math.log(2.0) - math.log(c * scale))
                    classes.append(BanachClassDescriptor(
                        "type_cotype",
                        {"p1": p1, "p2": p2, "r": r, "T": options.type_constant,
                         "C": options.cotype_constant, "theta_min": theta_min},
                        provenance="schatten criterion"))
    return rows, classes


def evaluate(scheme: GeneratorScheme, options: Optional[CriterionOptions] = None) -> CriterionReport:
    """Run the angle criterion on ``scheme``.

    The verdict is ``certified`` iff the largest Hilbert angle is strictly
    below ``(1 - epsilon)/(8N-11)``; without an explicit ``epsilon`` the
    slack is taken from the gap itself.
    """
    options = options or CriterionOptions()
    n = scheme.n_generators
    limit = threshold(n)
    data = scheme.pair_data.values()
    cos_max = max(d.cos() for d in data)
    side = scheme.link_side
    schatten_max: Dict[float, float] = {}
    for r in options.r_grid:
        values = [d.schatten_at(r, side) for d in data]
        if all(v is not None for v in values):
            schatten_max[float(r)] = max(values)  # type: ignore[type-var]
        else:
            logger.debug("Schatten r=%g unavailable for some pair of %s", r, scheme.name)

    failed: List[str] = []
    if options.epsilon is not None:
        s_constants(options.epsilon, n)
        epsilon = options.epsilon
        bound = (1.0 - epsilon) * limit
        certified = cos_max < bound
        if not certified:
            failed.append(f"cos_max = {cos_max:.6g} >= (1 - eps)/(8N-11) = {bound:.6g}")
    else:
        certified = cos_max < limit
        epsilon = min(1.0 - cos_max * (8 * n - 11), math.nextafter(1.0, 0.0))
        if not certified:
            failed.append(f"cos_max = {cos_max:.6g} >= 1/(8N-11) = {limit:.6g}")
    q = scheme.shared_q
    if q is not None and q <= (8 * n - 11) ** 2:
        failed.append(f"q = {q} <= (8N-11)^2 = {(8 * n - 11) ** 2}")

    if not certified:
        logger.warning("Scheme %s not certified: %s", scheme.name, "; ".join(failed))
        return CriterionReport(
            scheme_name=scheme.name, n_generators=n, threshold=limit, cos_max_hilbert=cos_max,
            schatten_max=schatten_max, verdict="not_certified", epsilon=None, s1=None, s2=None, s0=None,
            c_prime=None, class_params=(), type_cotype_grid=(), flp_exponent=None,
            zero_angle=cos_max == 0.0, failed_inequalities=tuple(failed))

    s1, s2, s0 = s_constants(epsilon, n)
    c_prime = _choose_c_prime(cos_max, limit, options.c_prime)
    classes: List[BanachClassDescriptor] = []
    rows: List[Dict[str, Any]] = []
    flp: Optional[float] = None
    zero_angle = cos_max == 0.0
    if zero_angle:
        logger.info("Scheme %s has zero angles: every class is admissible", scheme.name)
    else:
        delta, theta = class_params(cos_max, c_prime)
        classes.append(BanachClassDescriptor("hilbert_bm_ball", {"delta": delta}, "angle criterion"))
        classes.append(BanachClassDescriptor("theta_hilbertian", {"theta": theta}, "angle criterion"))
        grid_rows, grid_classes = _type_cotype_grid(schatten_max, c_prime, options)
        rows.extend(grid_rows)
        classes.extend(grid_classes)
        flp = 2.0 * (math.log(2.0) - math.log(cos_max)) / (math.log(2.0) + math.log(8 * n - 11))
    return CriterionReport(
        scheme_name=scheme.name, n_generators=n, threshold=limit, cos_max_hilbert=cos_max,
        schatten_max=schatten_max, verdict="certified", epsilon=epsilon, s1=s1, s2=s2, s0=s0,
        c_prime=c_prime, class_params=tuple(classes), type_cotype_grid=tuple(rows), flp_exponent=flp,
        zero_angle=zero_angle, failed_inequalities=tuple(failed))


def report_to_json(report: CriterionReport) -> Dict[str, Any]:
    return {
        "scheme": report.scheme_name,
        "n_generators": report.n_generators,
        "threshold": report.threshold,
        "cos_max_hilbert": report.cos_max_hilbert,
        "schatten_max": {exponent_key(r): v for r, v in sorted(report.schatten_max.items())},
        "verdict": report.verdict,
        "epsilon": report.epsilon,
        "s1": report.s1,
        "s2": report.s2,
        "s0": report.s0,
        "c_prime": report.c_prime,
        "zero_angle": report.zero_angle,
        "classes": [{"kind": c.kind, "params": dict(c.params), "provenance": c.provenance}
                    for c in report.class_params],
        "type_cotype_grid": [dict(row) for row in report.type_cotype_grid],
        "flp_exponent": report.flp_exponent,
        "failed_inequalities": list(report.failed_inequalities),
    }


def render_report(report: CriterionReport) -> str:
    """Human-readable inequality chain."""
    lines = [f"scheme {report.scheme_name}: N = {report.n_generators}"]
    relation = "<" if report.verdict == "certified" else ">="
    lines.append(f"  cos_max = {report.cos_max_hilbert:.6g} {relation} 1/(8N-11) = {report.threshold:.6g}")
    for r, value in sorted(report.schatten_max.items()):
        lines.append(f"  cos_max^(S^{exponent_key(r)}) = {value:.6g}")
    for failure in report.failed_inequalities:
        lines.append(f"  FAILED: {failure}")
    if report.verdict == "certified":
        lines.append(f"  eps = {report.epsilon:.6g}, s1 = {report.s1:.6g}, s2 = {report.s2:.6g}, "
                     f"s0 = {report.s0:.6g}")
        lines.append(f"  c' = {report.c_prime:.6g}")
        if report.zero_angle:
            lines.append("  all angles vanish: every class is admissible")
        for descriptor in report.class_params:
            params = ", ".join(f"{k} = {v:.6g}" for k, v in descriptor.params.items())
            lines.append(f"  class {descriptor.kind}: {params}")
        if report.flp_exponent is not None:
            lines.append(f"  F_(L^p) for p < {report.flp_exponent:.6g}")
    lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines)
