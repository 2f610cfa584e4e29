"""Congruence quotients of elementary groups and their Cayley graphs.

``EL_n(F_q[t]/(t^k))`` is enumerated by breadth-first closure from the
generators ``e_{i,i+1}(a)`` (``i < n``) and ``e_{n,1}(a)``, ``e_{n,1}(a t)``
with ``a`` running over the nonzero residues. Group elements are ``n x n``
matrices of truncated polynomials stored as ``(n, n, k)`` coefficient
arrays; their row-major bytes are the vertex keys.

Poincare constants use the degree-weighted convention

    sum_x d_x ||phi(x) - v(phi)||^2 <= C sum_{unordered edges} ||phi(x) - phi(y)||^2

so that the best ``l2`` constant is ``1 / mu_2`` with ``mu_2`` the
smallest nonzero eigenvalue of the normalized Laplacian. Values for other
``p`` come from a seeded local search and are lower bounds only.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from atomic_io import write_atomic
from constants import (
    CAYLEY_VERTEX_CAP,
    DEFAULT_POINCARE_P,
    DENSE_SPECTRUM_VERTICES,
    EIGSH_MAX_ITER,
    EIGSH_TOL,
    POINCARE_DIMENSION,
    POINCARE_RESTARTS,
    POINCARE_STEPS,
)
from errors import ExpanderError
from finite_group import is_prime
from seeding import make_rng, parallel_map, spawn_rngs

logger = logging.getLogger(__name__)

ExportFormat = Literal["dot", "csv_edges", "json"]


@dataclass(frozen=True)
class FiniteRingPoly:
    """The ring ``F_q[t]/(t^k)``; elements are length-``k`` coefficient vectors."""

    q: int
    k: int

    def __post_init__(self) -> None:
        if not is_prime(self.q) or self.q > 255:
            raise ExpanderError(f"q must be a prime below 256, got {self.q}", {"q": self.q}, code="not_prime")
        if self.k < 1:
            raise ExpanderError(f"Truncation degree must be >= 1, got {self.k}", code="bad_parameters")

    @property
    def size(self) -> int:
        return self.q ** self.k

    def element(self, coefficients: Sequence[int]) -> np.ndarray:
        out = np.zeros(self.k, dtype=np.int64)
        coeffs = np.asarray(coefficients, dtype=np.int64)[: self.k]
        out[: coeffs.size] = coeffs % self.q
        return out

    def zero(self) -> np.ndarray:
        return np.zeros(self.k, dtype=np.int64)

    def one(self) -> np.ndarray:
        return self.element([1])

    def t_power(self, degree: int, scalar: int = 1) -> np.ndarray:
        """``scalar * t^degree`` (zero once ``degree >= k``)."""
        out = self.zero()
        if degree < self.k:
            out[degree] = scalar % self.q
        return out

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a + b) % self.q

    def neg(self, a: np.ndarray) -> np.ndarray:
        return (-a) % self.q

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.convolve(a, b)[: self.k] % self.q

    def elements(self) -> Iterable[np.ndarray]:
        for code in range(self.size):
            yield np.array([(code // self.q ** d) % self.q for d in range(self.k)], dtype=np.int64)

    def identity_matrix(self, n: int) -> np.ndarray:
        out = np.zeros((n, n, self.k), dtype=np.int64)
        out[np.arange(n), np.arange(n), 0] = 1
        return out

    def elementary(self, n: int, i: int, j: int, s: np.ndarray) -> np.ndarray:
        """``e_{i,j}(s)`` with 1-based ``i != j``."""
        if i == j or not (1 <= i <= n and 1 <= j <= n):
            raise ExpanderError(f"Bad elementary position ({i}, {j}) for n = {n}", code="bad_parameters")
        out = self.identity_matrix(n)
        out[i - 1, j - 1] = s % self.q
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros_like(a)
        for degree in range(self.k):
            out[:, :, degree:] += np.einsum("il,ljb->ijb", a[:, :, degree], b[:, :, : self.k - degree])
        return out % self.q


def matrix_key(matrix: np.ndarray) -> bytes:
    """Canonical row-major serialization used as the vertex key."""
    return np.ascontiguousarray(matrix, dtype=np.uint8).tobytes()


@dataclass(frozen=True)
class GeneratorElement:
    label: str
    matrix: np.ndarray
    degenerate: bool = False


def steinberg_generators(n: int, q: int, k: int, m_style: str = "steinberg_layout") -> Tuple[GeneratorElement, ...]:
    """Nonidentity elements of the ``n + 1`` root subgroups.

    The set is closed under inverses because each root subgroup is. For
    ``k = 1`` the ``e_{n,1}(a t)`` elements collapse to the identity and are
    returned with ``degenerate=True``.
    """
    if m_style != "steinberg_layout":
        raise ExpanderError(f"Unknown generator layout {m_style!r}", code="bad_parameters")
    if n < 3:
        raise ExpanderError(f"Need n >= 3, got {n}", code="bad_parameters")
    ring = FiniteRingPoly(q, k)
    out: List[GeneratorElement] = []
    for i in range(1, n):
        for a in range(1, q):
            out.append(GeneratorElement(f"e_{i},{i + 1}({a})", ring.elementary(n, i, i + 1, ring.t_power(0, a))))
    for degree in (0, 1):
        for a in range(1, q):
            scalar = ring.t_power(degree, a)
            label = f"e_{n},1({a})" if degree == 0 else f"e_{n},1({a}*t)"
            out.append(GeneratorElement(label, ring.elementary(n, n, 1, scalar), degenerate=not scalar.any()))
    degenerate = [g.label for g in out if g.degenerate]
    if degenerate:
        logger.info("Generators %s are the identity in F_%d[t]/(t^%d)", degenerate, q, k)
    return tuple(out)


def sl_order(n: int, q: int, k: int) -> int:
    """``|SL_n(F_q[t]/(t^k))| = |SL_n(F_q)| q^((n^2 - 1)(k - 1))``."""
    base = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        base *= q ** i - 1
    return base * q ** ((n * n - 1) * (k - 1))


@dataclass(frozen=True, eq=False)
class QuotientGroup:
    """Elements of ``EL_n(F_q[t]/(t^k))`` sorted by key, plus the generator action.

    ``action[s, x]`` is the index of ``element(x) @ generators[s]``.
    """

    ring: FiniteRingPoly
    n: int
    elements: np.ndarray
    keys: Tuple[bytes, ...]
    generators: Tuple[GeneratorElement, ...]
    action: np.ndarray
    index: Dict[bytes, int] = field(repr=False, default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.keys)

    @property
    def identity_index(self) -> int:
        return self.index[matrix_key(self.ring.identity_matrix(self.n))]

    def element(self, i: int) -> np.ndarray:
        return self.elements[i]

    def index_of(self, matrix: np.ndarray) -> int:
        try:
            return self.index[matrix_key(matrix)]
        except KeyError:
            raise ExpanderError("Matrix is not an element of this quotient", code="not_an_element") from None

    def multiply(self, i: int, j: int) -> int:
        return self.index_of(self.ring.matmul(self.elements[i], self.elements[j]))


def build_quotient(n: int, q: int, k: int, cap: int = CAYLEY_VERTEX_CAP) -> QuotientGroup:
    """Enumerate ``EL_n(F_q[t]/(t^k))`` by breadth-first right multiplication.

    Raises:
        ExpanderError: When the closure passes ``cap`` elements.
    """
    ring = FiniteRingPoly(q, k)
    generators = tuple(g for g in steinberg_generators(n, q, k) if not g.degenerate)
    identity = ring.identity_matrix(n)
    seen: Dict[bytes, int] = {matrix_key(identity): 0}
    found: List[np.ndarray] = [identity]
    found_keys: List[bytes] = [matrix_key(identity)]
    arcs: List[List[int]] = [[] for _ in generators]
    cursor = 0
    while cursor < len(found):
        x = found[cursor]
        for s_index, generator in enumerate(generators):
            y = ring.matmul(x, generator.matrix)
            key = matrix_key(y)
            target = seen.get(key)
            if target is None:
                target = len(found)
                if target >= cap:
                    raise ExpanderError(
                        f"EL_{n}(F_{q}[t]/(t^{k})) has more than {cap} elements; try a smaller (n, q, k)",
                        {"n": n, "q": q, "k": k, "cap": cap}, code="cap_exceeded")
                seen[key] = target
                found.append(y)
                found_keys.append(key)
            arcs[s_index].append(target)
        cursor += 1
        if cursor % 10_000 == 0:
            logger.debug("BFS visited %d of %d discovered elements", cursor, len(found))
    order = sorted(range(len(found)), key=found_keys.__getitem__)
    position = np.empty(len(found), dtype=np.int64)
    position[order] = np.arange(len(found))
    action = np.empty((len(generators), len(found)), dtype=np.int64)
    for s_index, targets in enumerate(arcs):
        action[s_index, position] = position[np.asarray(targets, dtype=np.int64)]
    keys = tuple(found_keys[i] for i in order)
    elements = np.stack([found[i] for i in order])
    elements.setflags(write=False)
    logger.info("EL_%d(F_%d[t]/(t^%d)) has order %d", n, q, k, len(found))
    return QuotientGroup(ring=ring, n=n, elements=elements, keys=keys, generators=generators,
                         action=action, index={key: i for i, key in enumerate(keys)})


def reduction_map(element: np.ndarray, k_to: int) -> np.ndarray:
    """Image of a matrix over ``F_q[t]/(t^k)`` in ``F_q[t]/(t^k_to)``, ``k_to <= k``."""
    if not 1 <= k_to <= element.shape[-1]:
        raise ExpanderError(f"Cannot reduce degree {element.shape[-1]} to {k_to}", code="bad_parameters")
    return element[..., :k_to].copy()


@dataclass(frozen=True, eq=False)
class CayleyGraph:
    """Regular graph given by a symmetric sparse adjacency (entries count parallel edges)."""

    name: str
    adjacency: scipy.sparse.csr_matrix
    vertex_labels: Tuple[str, ...]
    generator_labels: Tuple[str, ...]
    identity_index: int = 0

    @property
    def order(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @property
    def valency(self) -> int:
        return int(round(self.degrees.max())) if self.order else 0

    def is_regular(self) -> bool:
        degrees = self.degrees
        return bool(np.all(degrees == degrees[0]))

    def is_symmetric(self) -> bool:
        return (self.adjacency != self.adjacency.T).nnz == 0

    def is_connected(self) -> bool:
        count, _ = connected_components(self.adjacency, directed=False)
        return count == 1

    def edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unordered edges ``u < v`` sorted, with multiplicities."""
        upper = scipy.sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order], upper.col[order], upper.data[order].astype(np.int64)


def cayley_graph(quotient: QuotientGroup, generators: Optional[Sequence[GeneratorElement]] = None) -> CayleyGraph:
    """Right-multiplication Cayley graph; degenerate (identity) generators are dropped.

    Raises:
        ExpanderError: If the generating set is not closed under inverses.
    """
    if generators is None:
        action = quotient.action
        labels = tuple(g.label for g in quotient.generators)
    else:
        used = [g for g in generators if not g.degenerate]
        labels = tuple(g.label for g in used)
        action = np.array([[quotient.index_of(quotient.ring.matmul(x, g.matrix)) for x in quotient.elements]
                           for g in used], dtype=np.int64).reshape(len(used), quotient.order)
    order = quotient.order
    rows = np.tile(np.arange(order), action.shape[0])
    adjacency = scipy.sparse.csr_matrix((np.ones(rows.size), (rows, action.ravel())), shape=(order, order))
    adjacency.sum_duplicates()
    graph = CayleyGraph(
        name=f"EL{quotient.n}-F{quotient.ring.q}-t{quotient.ring.k}",
        adjacency=adjacency,
        vertex_labels=tuple(key.hex() for key in quotient.keys),
        generator_labels=labels,
        identity_index=quotient.identity_index,
    )
    if not graph.is_symmetric():
        raise ExpanderError("Generating set is not closed under inverses", code="not_symmetric")
    return graph


def _circulant(m: int, steps: Iterable[int], name: str) -> CayleyGraph:
    shifts = sorted({s % m for s in steps} - {0})
    rows = np.repeat(np.arange(m), len(shifts))
    cols = (rows + np.tile(shifts, m)) % m
    adjacency = scipy.sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(m, m))
    return CayleyGraph(name=name, adjacency=adjacency, vertex_labels=tuple(str(i) for i in range(m)),
                       generator_labels=tuple(str(s) for s in shifts))


def complete_graph(m: int) -> CayleyGraph:
    """``K_m`` as the Cayley graph of ``Z/m`` with every nonzero step."""
    if m < 2:
        raise ExpanderError(f"Complete graph needs m >= 2, got {m}", code="bad_parameters")
    return _circulant(m, range(1, m), f"K{m}")


def cycle_graph(m: int) -> CayleyGraph:
    if m < 3:
        raise ExpanderError(f"Cycle needs m >= 3, got {m}", code="bad_parameters")
    return _circulant(m, (1, -1), f"C{m}")


def _normalized_adjacency(graph: CayleyGraph) -> scipy.sparse.csr_matrix:
    scale = scipy.sparse.diags(1.0 / np.sqrt(graph.degrees))
    return (scale @ graph.adjacency @ scale).tocsr()


def _top_eigenpairs(graph: CayleyGraph, count: int, seed: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Largest ``count`` eigenpairs of ``D^-1/2 A D^-1/2``, descending."""
    if not graph.is_connected():
        raise ExpanderError(f"Graph {graph.name} is disconnected", code="disconnected")
    operator = _normalized_adjacency(graph)
    count = min(count, graph.order)
    if graph.order <= DENSE_SPECTRUM_VERTICES:
        values, vectors = scipy.linalg.eigh(operator.toarray())
    else:
        v0 = make_rng(seed).standard_normal(graph.order)
        try:
            values, vectors = eigsh(operator, k=count, which="LA", tol=EIGSH_TOL, maxiter=EIGSH_MAX_ITER, v0=v0)
        except ArpackNoConvergence as e:
            raise ExpanderError(f"Eigensolver did not converge on {graph.name}",
                                {"converged": len(e.eigenvalues), "maxiter": EIGSH_MAX_ITER},
                                code="eigensolver") from e
    order = np.argsort(values)[::-1][:count]
    return values[order], vectors[:, order]


def spectral_gap(graph: CayleyGraph, seed: Optional[int] = None) -> float:
    """Smallest nonzero eigenvalue ``mu_2`` of the normalized Laplacian."""
    values, _ = _top_eigenpairs(graph, 6, seed)
    return float(1.0 - values[1])


def fiedler_map(graph: CayleyGraph, seed: Optional[int] = None) -> np.ndarray:
    """Scalar map ``D^-1/2 u_2`` attaining the best l2 Poincare constant."""
    _, vectors = _top_eigenpairs(graph, 6, seed)
    return vectors[:, 1] / np.sqrt(graph.degrees)


def _incidence(graph: CayleyGraph) -> Tuple[scipy.sparse.csr_matrix, np.ndarray]:
    rows, cols, weights = graph.edges()
    count = rows.size
    data = np.concatenate([np.ones(count), -np.ones(count)])
    index = np.concatenate([np.arange(count), np.arange(count)])
    matrix = scipy.sparse.csr_matrix((data, (index, np.concatenate([rows, cols]))), shape=(count, graph.order))
    return matrix, weights.astype(np.float64)


def _sq_norms(y: np.ndarray, p: float) -> np.ndarray:
    return np.linalg.norm(y, ord=p, axis=1) ** 2


def _sq_norm_grad(y: np.ndarray, p: float) -> np.ndarray:
    """Row-wise gradient of ``||y||_p^2``."""
    norms = np.linalg.norm(y, ord=p, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return 2.0 * (safe ** (2.0 - p))[:, None] * np.sign(y) * np.abs(y) ** (p - 1.0)


def _best_translate(phi: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    center = weights @ phi / weights.sum()
    if p == 2.0:
        return center

    def objective(v: np.ndarray) -> Tuple[float, np.ndarray]:
        diff = phi - v
        return float(weights @ _sq_norms(diff, p)), -(weights @ _sq_norm_grad(diff, p))

    result = scipy.optimize.minimize(objective, center, jac=True, method="L-BFGS-B")
    return result.x


def poincare_ratio(graph: CayleyGraph, phi: np.ndarray, p: float = 2.0) -> float:
    """``sum_x d_x ||phi(x) - v||_p^2 / sum_edges ||phi(x) - phi(y)||_p^2`` at the best ``v``."""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim == 1:
        phi = phi[:, None]
    incidence, weights = _incidence(graph)
    return _ratio(phi, graph.degrees, incidence, weights, p)[0]


def _ratio(phi: np.ndarray, degrees: np.ndarray, incidence: scipy.sparse.csr_matrix, weights: np.ndarray,
           p: float) -> Tuple[float, np.ndarray]:
    v = _best_translate(phi, degrees, p)
    numerator = float(degrees @ _sq_norms(phi - v, p))
    denominator = float(weights @ _sq_norms(incidence @ phi, p))
    if denominator <= 0:
        return 0.0, v
    return numerator / denominator, v


def _ascend(phi: np.ndarray, graph: CayleyGraph, incidence: scipy.sparse.csr_matrix, weights: np.ndarray,
            p: float, steps: int) -> float:
    degrees = graph.degrees
    best, v = _ratio(phi, degrees, incidence, weights, p)
    step = 0.1
    for _ in range(steps):
        diff = incidence @ phi
        denominator = float(weights @ _sq_norms(diff, p))
        if denominator <= 0:
            break
        grad_num = degrees[:, None] * _sq_norm_grad(phi - v, p)
        grad_den = incidence.T @ (weights[:, None] * _sq_norm_grad(diff, p))
        grad = (grad_num - best * grad_den) / denominator
        size = np.linalg.norm(grad)
        if size == 0:
            break
        candidate = phi + step * np.linalg.norm(phi) / size * grad
        value, candidate_v = _ratio(candidate, degrees, incidence, weights, p)
        if value > best:
            phi, v, best = candidate, candidate_v, value
            step *= 1.5
        else:
            step /= 2.0
            if step < 1e-8:
                break
    return best


@dataclass(frozen=True)
class PoincareReport:
    """Spectral and Poincare data of one graph (degree-weighted convention)."""

    order: int
    valency: int
    lambda2: float
    c_l2: float
    c_lp_lower: Dict[float, float]
    restarts: int
    dimension: int
    diameter: int
    convention: str = "sum_x d_x ||phi(x) - v||^2 <= C sum_{unordered edges} ||phi(x) - phi(y)||^2"


def poincare_constants(graph: CayleyGraph, p_values: Iterable[float] = DEFAULT_POINCARE_P,
                       seed: Optional[int] = None, restarts: int = POINCARE_RESTARTS,
                       steps: int = POINCARE_STEPS, dimension: int = POINCARE_DIMENSION,
                       threads: Optional[int] = None) -> PoincareReport:
    """Exact l2 constant from the spectrum plus seeded lower bounds for ``R^dimension`` with the p-norm.

    Each restart starts from low eigenvectors mixed by a random
    ``k x dimension`` matrix (restart 0 lifts the Fiedler map) and climbs
    the ratio by gradient steps, re-optimizing the translate ``v(phi)``.
    """
    values, vectors = _top_eigenpairs(graph, dimension + 2, seed)
    gap = float(1.0 - values[1])
    low = vectors[:, 1:] / np.sqrt(graph.degrees)[:, None]
    incidence, weights = _incidence(graph)
    p_list = sorted({float(p) for p in p_values})

    def search(job: Tuple[float, np.random.Generator]) -> float:
        p, rng = job
        best = 0.0
        for restart in range(restarts):
            if restart == 0:
                mix = np.zeros((low.shape[1], dimension))
                mix[0, 0] = 1.0
            else:
                mix = rng.standard_normal((low.shape[1], dimension))
            phi = low @ mix + 1e-3 * rng.standard_normal((graph.order, dimension))
            best = max(best, _ascend(phi, graph, incidence, weights, p, steps))
        return best

    jobs = list(zip(p_list, spawn_rngs(seed, len(p_list))))
    lower = dict(zip(p_list, parallel_map(search, jobs, threads)))
    distances = shortest_path(graph.adjacency, unweighted=True, directed=False, indices=graph.identity_index)
    return PoincareReport(order=graph.order, valency=graph.valency, lambda2=gap, c_l2=1.0 / gap,
                          c_lp_lower=lower, restarts=restarts, dimension=dimension,
                          diameter=int(np.max(distances)))


def poincare_to_json(report: PoincareReport) -> Dict[str, Any]:
    return {
        "order": report.order,
        "valency": report.valency,
        "gap": report.lambda2,
        "c_l2": report.c_l2,
        "c_lp": {format(p, "g"): value for p, value in sorted(report.c_lp_lower.items())},
        "restarts": report.restarts,
        "dimension": report.dimension,
        "diameter": report.diameter,
        "convention": report.convention,
    }


def graph_to_json(graph: CayleyGraph) -> Dict[str, Any]:
    rows, cols, mult = graph.edges()
    return {
        "name": graph.name,
        "order": graph.order,
        "valency": graph.valency,
        "identity": graph.identity_index,
        "vertices": list(graph.vertex_labels),
        "generators": list(graph.generator_labels),
        "edges": [[int(u), int(v), int(m)] for u, v, m in zip(rows, cols, mult)],
    }


def render_graph(graph: CayleyGraph, fmt: ExportFormat) -> str:
    """Deterministic text serialization (vertices in key order)."""
    if fmt == "json":
        return json.dumps(graph_to_json(graph), sort_keys=True) + "\n"
    rows, cols, _ = graph.edges()
    if fmt == "csv_edges":
        return "".join(f"{u},{v}\n" for u, v in zip(rows, cols))
    if fmt == "dot":
        lines = [f'graph "{graph.name}" {{']
        lines.extend(f'  {i} [label="{label}"];' for i, label in enumerate(graph.vertex_labels))
        lines.extend(f"  {u} -- {v};" for u, v in zip(rows, cols))
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ExpanderError(f"Unknown export format {fmt!r}", code="bad_format")


def export(graph: CayleyGraph, fmt: ExportFormat, path: str) -> None:
    text = render_graph(graph, fmt)
    try:
        write_atomic(path, text)
    except OSError as e:
        raise ExpanderError(f"Could not write {path}: {e}", {"path": path}, code="io_error") from e


def import_json(source: Union[str, Mapping[str, Any]]) -> CayleyGraph:
    """Rebuild a graph from its JSON export (a path or the parsed object)."""
    if isinstance(source, str):
        try:
            with open(source, encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise ExpanderError(f"Could not read graph {source}: {e}", {"path": source}, code="io_error") from e
    else:
        data = source
    try:
        order = int(data["order"])
        edges = np.asarray(data["edges"], dtype=np.int64).reshape(-1, 3)
        labels = tuple(str(v) for v in data["vertices"])
    except (KeyError, TypeError, ValueError) as e:
        raise ExpanderError(f"Malformed graph JSON: {e}", code="malformed_graph") from e
    if len(labels) != order or (edges.size and (edges[:, :2].min() < 0 or edges[:, :2].max() >= order)):
        raise ExpanderError("Graph JSON vertices and edges disagree", code="malformed_graph")
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    weights = np.concatenate([edges[:, 2], edges[:, 2]]).astype(np.float64)
    adjacency = scipy.sparse.csr_matrix((weights, (rows, cols)), shape=(order, order))
    return CayleyGraph(name=str(data.get("name", "imported")), adjacency=adjacency, vertex_labels=labels,
                       generator_labels=tuple(data.get("generators", ())),
                       identity_index=int(data.get("identity", 0)))


def left_translation_permutation(quotient: QuotientGroup, g: int) -> np.ndarray:
    """``perm[x] = index(g x)``; left translations are automorphisms of the right Cayley graph."""
    matrix = quotient.element(g)
    return np.array([quotient.index_of(quotient.ring.matmul(matrix, x)) for x in quotient.elements],
                    dtype=np.int64)
