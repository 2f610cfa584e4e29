"""Coset graphs, their Laplacian spectra, and the angle data they predict.

For subgroups ``K1, K2`` generating a finite group ``K12`` the bipartite
coset graph joins ``K1 g`` to ``K2 g'`` when the cosets meet. The nonzero
singular values of ``lambda(k1 k2 - k12)`` in the left regular
representation are exactly the nonzero ``|1 - eta_i|`` for
``i = 2 .. min(|V1|, |V2|)``, where ``eta_i`` are the normalized
Laplacian eigenvalues of that graph. ``angle_report`` computes both sides
and refuses to report when they disagree.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from constants import DENSE_ORDER_CAP, LEMMA_MATCH_TOL, SPECTRUM_CLAMP_TOL, ZERO_SINGULAR_TOL
from errors import SpectrumError
from finite_group import RightCosetPartition, Subgroup, closure, intersection, right_cosets
from group_algebra import averaging_idempotent, convolve, regular_rep
from seeding import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Bipartite graph with sides ``V1 = 0..v1_size-1`` and ``V2 = 0..v2_size-1``.

    ``biadjacency[a, b] = 1`` when ``a in V1`` and ``b in V2`` are adjacent.
    Vertices of the full graph are ordered ``V1`` first, then ``V2``.
    """

    v1_size: int
    v2_size: int
    edges: Tuple[Tuple[int, int], ...]

    @property
    def size(self) -> int:
        return self.v1_size + self.v2_size

    def biadjacency(self) -> np.ndarray:
        matrix = np.zeros((self.v1_size, self.v2_size))
        for a, b in self.edges:
            matrix[a, b] = 1.0
        return matrix

    def adjacency(self) -> np.ndarray:
        b = self.biadjacency()
        top = np.hstack([np.zeros((self.v1_size, self.v1_size)), b])
        bottom = np.hstack([b.T, np.zeros((self.v2_size, self.v2_size))])
        return np.vstack([top, bottom])

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def is_connected(self) -> bool:
        count, _ = connected_components(scipy.sparse.csr_matrix(self.adjacency()), directed=False)
        return count == 1


@dataclass(frozen=True, eq=False)
class BipartiteCosetGraph(BipartiteGraph):
    """The coset graph of a generating pair ``(K1, K2)``.

    Every ``V1`` vertex has degree ``l1 = [K1 : K1 & K2]`` and every ``V2``
    vertex degree ``l2 = [K2 : K1 & K2]``.
    """

    k1: Optional[Subgroup] = None
    k2: Optional[Subgroup] = None
    v1: Optional[RightCosetPartition] = None
    v2: Optional[RightCosetPartition] = None
    l1: int = 0
    l2: int = 0


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    """Normalized Laplacian eigen-decomposition.

    ``eigenvectors[:, i]`` is ``psi_i`` in vertex coordinates (not the
    symmetrised basis); they are orthonormal for the degree inner product
    ``<psi, phi> = sum_v d(v) psi(v) phi(v)``.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    inner_product_weights: np.ndarray

    @property
    def eta2(self) -> float:
        return float(self.eigenvalues[1])


@dataclass(frozen=True)
class AngleReport:
    """Angle and Schatten data for ``lambda(k1 k2 - k12)``.

    ``lemma_predicted`` holds the nonzero ``(1 - eta_i)^2`` from the graph;
    ``nontrivial_singular_values`` the nonzero singular values from the
    regular representation, or ``None`` in lemma-only mode.
    """

    hilbert_cos: float
    schatten: Dict[float, float]
    nontrivial_singular_values: Optional[Tuple[float, ...]]
    lemma_predicted: Tuple[float, ...]
    eta2: float
    v1_size: int
    v2_size: int
    lemma_only: bool = False


@dataclass(frozen=True)
class LinkEntry:
    pair: Tuple[int, int]
    eta2: float
    v1_size: int
    v2_size: int


@dataclass(frozen=True)
class LinkTable:
    """Per-pair spectral gaps of links, as consumed by the criterion."""

    entries: Tuple[LinkEntry, ...]

    @property
    def eta(self) -> float:
        """The binding (smallest) gap over all pairs."""
        return min(entry.eta2 for entry in self.entries)

    @property
    def L(self) -> int:
        return max(min(entry.v1_size, entry.v2_size) for entry in self.entries)


def build_coset_graph(k1: Subgroup, k2: Subgroup) -> BipartiteCosetGraph:
    """Bipartite graph on right cosets of ``k1`` and ``k2``.

    Raises:
        SpectrumError: If the subgroups do not share a parent or do not
            generate it (the context names the proper closure's order).
    """
    parent = k1.parent
    if k2.parent is not parent:
        raise SpectrumError("K1 and K2 must be subgroups of the same group", code="parent_mismatch")
    generated = closure(parent, k1.elements + k2.elements)
    if generated.order != parent.order:
        raise SpectrumError(
            f"K1 and K2 generate a proper subgroup of order {generated.order}, not {parent.order}",
            {"closure_order": generated.order, "parent_order": parent.order,
             "closure": list(generated.elements)},
            code="not_generating",
        )
    v1 = right_cosets(k1)
    v2 = right_cosets(k2)
    # K1 g and K2 g' meet exactly when some h lies in both, i.e. an edge per element
    pairs = np.unique(np.stack([v1.coset_of, v2.coset_of], axis=1), axis=0)
    edges = tuple((int(a), int(b)) for a, b in pairs)
    meet = intersection(k1, k2).order
    l1, l2 = k1.order // meet, k2.order // meet
    graph = BipartiteCosetGraph(v1_size=len(v1), v2_size=len(v2), edges=edges,
                                k1=k1, k2=k2, v1=v1, v2=v2, l1=l1, l2=l2)
    degrees = graph.degrees()
    if not (np.all(degrees[:graph.v1_size] == l1) and np.all(degrees[graph.v1_size:] == l2)):
        raise SpectrumError("Coset graph is not semi-regular", {"l1": l1, "l2": l2},
                            code="not_semiregular")
    if not (len(edges) == graph.v1_size * l1 == graph.v2_size * l2):
        raise SpectrumError("Edge counts disagree between the two sides", code="not_semiregular")
    if not graph.is_connected():
        raise SpectrumError("Coset graph of a generating pair must be connected", code="disconnected")
    logger.debug("Coset graph %s: |V1|=%d |V2|=%d l1=%d l2=%d", parent.name,
                 graph.v1_size, graph.v2_size, l1, l2)
    return graph


def bipartite_from_edges(v1_size: int, v2_size: int, edges: Iterable[Sequence[int]]) -> BipartiteGraph:
    """Bipartite graph from ``(a, b)`` pairs with ``a`` in V1 and ``b`` in V2."""
    cleaned = set()
    for edge in edges:
        a, b = int(edge[0]), int(edge[1])
        if not (0 <= a < v1_size and 0 <= b < v2_size):
            raise SpectrumError(f"Edge {(a, b)} outside sides ({v1_size}, {v2_size})",
                                code="malformed_link")
        cleaned.add((a, b))
    return BipartiteGraph(v1_size=v1_size, v2_size=v2_size, edges=tuple(sorted(cleaned)))


def laplacian_spectrum(graph: BipartiteGraph, with_vectors: bool = True) -> LaplacianSpectrum:
    """Full spectrum of ``Delta psi(v) = psi(v) - (1/d(v)) sum_{u~v} psi(u)``.

    Solved as the symmetric problem ``I - D^-1/2 A D^-1/2``; eigenvalues
    within SPECTRUM_CLAMP_TOL outside ``[0, 2]`` are clamped.

    Raises:
        SpectrumError: If the graph is disconnected (or has isolated vertices).
    """
    adjacency = graph.adjacency()
    degrees = adjacency.sum(axis=1)
    if np.any(degrees == 0) or not graph.is_connected():
        raise SpectrumError("Laplacian spectrum needs a connected graph", code="disconnected")
    d_inv_sqrt = 1.0 / np.sqrt(degrees)
    symmetric = np.eye(graph.size) - d_inv_sqrt[:, None] * adjacency * d_inv_sqrt[None, :]
    if with_vectors:
        values, vectors = scipy.linalg.eigh(symmetric)
        vectors = d_inv_sqrt[:, None] * vectors
    else:
        values = scipy.linalg.eigh(symmetric, eigvals_only=True)
        vectors = None
    low = (values < 0) & (values > -SPECTRUM_CLAMP_TOL)
    high = (values > 2) & (values < 2 + SPECTRUM_CLAMP_TOL)
    values = np.where(low, 0.0, np.where(high, 2.0, values))
    return LaplacianSpectrum(eigenvalues=values, eigenvectors=vectors, inner_product_weights=degrees)


def half_step_operators(graph: BipartiteGraph) -> Tuple[np.ndarray, np.ndarray]:
    """``M1 = chi_V1 (I - Delta) chi_V2`` and ``M2 = chi_V2 (I - Delta) chi_V1`` on L^2(V)."""
    adjacency = graph.adjacency()
    walk = adjacency / adjacency.sum(axis=1)[:, None]  # I - Delta
    side1 = np.zeros(graph.size)
    side1[:graph.v1_size] = 1.0
    side2 = 1.0 - side1
    m1 = side1[:, None] * walk * side2[None, :]
    m2 = side2[:, None] * walk * side1[None, :]
    return m1, m2


def schatten_norm(singular_values: Sequence[float], r: float) -> float:
    """``(sum s_i^r)^(1/r)``; ``r = inf`` gives the operator norm."""
    values = np.asarray(singular_values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    if math.isinf(r):
        return float(values.max())
    if r < 1:
        raise SpectrumError(f"Schatten exponent must be >= 1, got {r}", code="bad_exponent")
    return float(np.sum(values ** r) ** (1.0 / r))


def _lemma_prediction(spectrum: LaplacianSpectrum, v1_size: int, v2_size: int) -> np.ndarray:
    upper = min(v1_size, v2_size)
    candidates = 1.0 - spectrum.eigenvalues[1:upper]
    nonzero = candidates[np.abs(candidates) > ZERO_SINGULAR_TOL]
    return np.sort(nonzero ** 2)


def angle_report(k1: Subgroup, k2: Subgroup, r_values: Iterable[float] = (2.0,),
                 cap: int = DENSE_ORDER_CAP) -> AngleReport:
    """Hilbert and Schatten angle data for the pair ``(k1, k2)``.

    The graph side always runs. When the parent order is within ``cap`` the
    singular values of ``lambda(k1 k2 - k12)`` are computed directly and
    must match the graph prediction to LEMMA_MATCH_TOL; above the cap the
    report is built from the graph alone and flagged ``lemma_only``.

    Raises:
        SpectrumError: On generation failure or if the two sides disagree.
    """
    graph = build_coset_graph(k1, k2)
    spectrum = laplacian_spectrum(graph, with_vectors=False)
    predicted = _lemma_prediction(spectrum, graph.v1_size, graph.v2_size)
    predicted_values = np.sqrt(predicted)
    parent = k1.parent
    oracle: Optional[np.ndarray] = None
    lemma_only = parent.order > cap
    if lemma_only:
        logger.warning("Order %d above dense cap %d: using the graph prediction only", parent.order, cap)
        values = predicted_values
    else:
        k_full = averaging_idempotent(closure(parent, k1.elements + k2.elements))
        difference = convolve(averaging_idempotent(k1), averaging_idempotent(k2)) - k_full
        singular = scipy.linalg.svdvals(regular_rep(difference, cap=cap).matrix)
        oracle = np.sort(singular[singular > ZERO_SINGULAR_TOL])
        if oracle.shape != predicted_values.shape or (
                oracle.size and np.max(np.abs(oracle - predicted_values)) > LEMMA_MATCH_TOL):
            raise SpectrumError(
                "Regular representation disagrees with the coset graph prediction",
                {"oracle": oracle.tolist(), "predicted": predicted_values.tolist()},
                code="lemma_mismatch",
            )
        values = oracle
    hilbert = float(min(1.0, max(0.0, values.max()))) if values.size else 0.0
    schatten = {float(r): schatten_norm(values, float(r)) for r in r_values}
    return AngleReport(
        hilbert_cos=hilbert,
        schatten=schatten,
        nontrivial_singular_values=None if oracle is None else tuple(float(v) for v in oracle),
        lemma_predicted=tuple(float(v) for v in predicted),
        eta2=spectrum.eta2,
        v1_size=graph.v1_size,
        v2_size=graph.v2_size,
        lemma_only=lemma_only,
    )


def corollary_bounds(report: AngleReport) -> Dict[str, Any]:
    """Upper bounds ``1 - eta2`` and ``(1 - eta2) * min(|V1|, |V2|)^(1/r)``."""
    base = 1.0 - report.eta2
    side = min(report.v1_size, report.v2_size)
    return {
        "hilbert": base,
        "schatten": {r: base * (1.0 if math.isinf(r) else side ** (1.0 / r)) for r in report.schatten},
    }


def batch_angle_reports(pairs: Sequence[Tuple[Subgroup, Subgroup]], r_values: Iterable[float] = (2.0,),
                        cap: int = DENSE_ORDER_CAP, threads: Optional[int] = None) -> List[AngleReport]:
    """Angle reports for independent pairs, in input order."""
    grid = tuple(r_values)
    return parallel_map(lambda pair: angle_report(pair[0], pair[1], grid, cap), pairs, threads)


def angle_report_to_json(report: AngleReport) -> Dict[str, Any]:
    return {
        "hilbert_cos": report.hilbert_cos,
        "schatten": {exponent_key(r): v for r, v in sorted(report.schatten.items())},
        "predicted": list(report.lemma_predicted),
        "oracle": None if report.nontrivial_singular_values is None
        else [v * v for v in report.nontrivial_singular_values],
        "eta2": report.eta2,
        "v1_size": report.v1_size,
        "v2_size": report.v2_size,
        "lemma_only": report.lemma_only,
    }


def exponent_key(r: float) -> str:
    return "inf" if math.isinf(r) else format(r, "g")


def link_ingest(source: Union[str, Sequence[Mapping[str, Any]]]) -> LinkTable:
    """Read a link spectra file (path or parsed JSON list).

    Each entry gives ``pair``, ``v1_size``, ``v2_size`` and either an
    ``edges`` list of ``[a, b]`` (``a`` in V1, ``b`` in V2) or ``eta2``.

    Raises:
        SpectrumError: On malformed entries or ``eta2`` outside ``(0, 2)``.
    """
    from pydantic import ValidationError

    from pydantic_models import LinkPairModel

    if isinstance(source, str):
        try:
            with open(source, encoding="utf-8") as handle:
                raw = json.load(handle)
        except json.JSONDecodeError as e:
            raise SpectrumError(f"Link spectra file is not valid JSON: {e}", {"path": source},
                                code="malformed_link") from e
    else:
        raw = list(source)
    if not isinstance(raw, list) or not raw:
        raise SpectrumError("Link spectra must be a non-empty JSON array", code="malformed_link")
    entries = []
    seen: Dict[Tuple[int, int], int] = {}
    for position, item in enumerate(raw):
        try:
            model = LinkPairModel.model_validate(item)
        except ValidationError as e:
            raise SpectrumError(f"Malformed link entry {position}: {e.errors()[0]['msg']}",
                                {"entry": position}, code="malformed_link") from e
        key = (min(model.pair), max(model.pair))
        if key in seen:
            raise SpectrumError(f"Pair {list(key)} listed twice (entries {seen[key]} and {position})",
                                {"pair": list(key), "entries": [seen[key], position]}, code="duplicate_pair")
        seen[key] = position
        if model.edges is not None:
            graph = bipartite_from_edges(model.v1_size, model.v2_size, model.edges)
            eta2 = laplacian_spectrum(graph, with_vectors=False).eta2
        else:
            eta2 = float(model.eta2)  # type: ignore[arg-type]
        if not 0.0 < eta2 < 2.0:
            raise SpectrumError(f"eta2 = {eta2} for pair {model.pair} is outside (0, 2)",
                                {"pair": list(model.pair)}, code="eta_out_of_range")
        entries.append(LinkEntry(pair=(model.pair[0], model.pair[1]), eta2=eta2,
                                 v1_size=model.v1_size, v2_size=model.v2_size))
    return LinkTable(entries=tuple(entries))
