"""Finite groups as explicit multiplication tables.

Elements are dense indices ``0 .. order-1`` with the identity at index 0.
Tables are read-only numpy arrays; subgroups keep sorted index tuples.
Haar measure is the uniform probability measure (weight ``1/order``).
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from constants import EXHAUSTIVE_ASSOCIATIVITY_ORDER, RANDOM_ASSOCIATIVITY_TRIPLES, TABLE_ORDER_CAP
from errors import GroupError
from seeding import make_rng

logger = logging.getLogger(__name__)

IDENTITY: int = 0


def is_prime(q: int) -> bool:
    """Trial-division primality test (inputs here are small)."""
    if not isinstance(q, (int, np.integer)) or q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    for d in range(3, math.isqrt(int(q)) + 1, 2):
        if q % d == 0:
            return False
    return True


def _require_prime(q: int) -> None:
    if not is_prime(q):
        raise GroupError(f"q must be prime, got {q}", {"q": q}, code="not_prime")


@dataclass(frozen=True, eq=False)
class GroupTable:
    """A finite group given by its multiplication table.

    Attributes:
        name: Identifier used in JSON exports (``group_id``).
        mul: ``order x order`` table, ``mul[a, b]`` is the index of ``a*b``.
        inv: ``inv[g]`` is the index of ``g^-1``.
        generator_labels: Named elements (``"x"``, ``"y"``, ...).
        subgroup_handles: Named subgroups given by generating seeds.
    """

    name: str
    mul: np.ndarray
    inv: np.ndarray
    generator_labels: Dict[str, int] = field(default_factory=dict)
    subgroup_handles: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        order = self.mul.shape[0]
        if self.mul.ndim != 2 or self.mul.shape != (order, order) or order < 1:
            raise GroupError("Multiplication table must be a non-empty square array",
                             {"shape": list(self.mul.shape)}, code="bad_table")
        if order > TABLE_ORDER_CAP:
            raise GroupError(f"Group order {order} exceeds the dense table cap {TABLE_ORDER_CAP}",
                             {"order": order, "cap": TABLE_ORDER_CAP}, code="cap_exceeded")
        if self.inv.shape != (order,):
            raise GroupError("Inverse table length does not match the order", {"order": order},
                             code="bad_table")
        for label, g in self.generator_labels.items():
            if not 0 <= g < order:
                raise GroupError(f"Generator {label!r} index {g} out of range", {"order": order},
                                 code="bad_index")
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    @property
    def identity(self) -> int:
        return IDENTITY

    def multiply(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, g: int) -> int:
        return int(self.inv[g])

    def element(self, label: str) -> int:
        """Index of a labelled generator."""
        try:
            return self.generator_labels[label]
        except KeyError:
            raise GroupError(f"Unknown generator label {label!r}",
                             {"labels": sorted(self.generator_labels)}, code="bad_label") from None

    def handle(self, name: str) -> "Subgroup":
        """Subgroup generated by the seeds registered under ``name``."""
        if name not in self.subgroup_handles:
            raise GroupError(f"Unknown subgroup handle {name!r}",
                             {"handles": sorted(self.subgroup_handles)}, code="bad_label")
        return closure(self, self.subgroup_handles[name])


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of ``parent`` stored as a sorted tuple of element indices."""

    parent: GroupTable
    elements: Tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    def __contains__(self, g: object) -> bool:
        if not isinstance(g, (int, np.integer)):
            return False
        pos = np.searchsorted(self.as_array(), g)
        return bool(pos < self.order and self.elements[pos] == g)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self.elements == other.elements

    def __hash__(self) -> int:
        return hash((id(self.parent), self.elements))


@dataclass(frozen=True, eq=False)
class RightCosetPartition:
    """Right cosets ``K g`` of a subgroup, ordered by smallest member."""

    subgroup: Subgroup
    cosets: Tuple[Tuple[int, ...], ...]
    coset_of: np.ndarray

    def __len__(self) -> int:
        return len(self.cosets)


def _table_from_rule(name: str, order: int, rule) -> Tuple[np.ndarray, np.ndarray]:
    """Tabulate ``rule(a_indices, b_indices)`` and derive inverses from the identity column."""
    idx = np.arange(order, dtype=np.int64)
    mul = np.asarray(rule(idx[:, None], idx[None, :]), dtype=np.int64)
    if mul.shape != (order, order):
        mul = np.broadcast_to(mul, (order, order)).copy()
    rows, cols = np.nonzero(mul == IDENTITY)
    inv = np.empty(order, dtype=np.int64)
    inv[rows] = cols
    logger.debug("Tabulated %s of order %d", name, order)
    return mul, inv


def build_heisenberg(q: int) -> GroupTable:
    """Heisenberg group H_q of upper unitriangular 3x3 matrices over F_q.

    Element ``(a, b, c)`` is the matrix with ``a`` at (1,2), ``b`` at (2,3)
    and ``c`` at (1,3), stored at index ``a + q*b + q^2*c``. Then ``x`` is
    index 1, ``y`` is index q and ``z = [x, y]`` is index q^2.
    """
    _require_prime(q)

    def rule(i, j):
        a1, b1, c1 = i % q, (i // q) % q, i // (q * q)
        a2, b2, c2 = j % q, (j // q) % q, j // (q * q)
        return (a1 + a2) % q + q * ((b1 + b2) % q) + q * q * ((c1 + c2 + a1 * b2) % q)

    mul, inv = _table_from_rule(f"H_{q}", q ** 3, rule)
    return GroupTable(
        name=f"heisenberg-{q}",
        mul=mul,
        inv=inv,
        generator_labels={"x": 1, "y": q, "z": q * q},
        subgroup_handles={"K1": (1,), "K2": (q,)},
    )


def build_elementary_abelian_pair(q: int) -> GroupTable:
    """F_q x F_q with ``x = (1, 0)`` and ``y = (0, 1)``; handles K1, K2 are the factors."""
    _require_prime(q)

    def rule(i, j):
        return (i % q + j % q) % q + q * ((i // q + j // q) % q)

    mul, inv = _table_from_rule(f"F_{q}^2", q * q, rule)
    return GroupTable(
        name=f"product-{q}",
        mul=mul,
        inv=inv,
        generator_labels={"x": 1, "y": q},
        subgroup_handles={"K1": (1,), "K2": (q,)},
    )


def build_symmetric(n: int) -> GroupTable:
    """Symmetric group S_n on ``{0..n-1}``, elements in lexicographic order.

    Products compose right to left: ``(a*b)(i) = a(b(i))``. Label ``s{i}``
    is the transposition of points ``i-1`` and ``i`` (``s1 = (12)``).
    """
    if not 2 <= n <= 6:
        raise GroupError(f"Symmetric groups are supported for 2 <= n <= 6, got {n}", {"n": n},
                         code="bad_parameter")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    order = perms.shape[0]
    weights = n ** np.arange(n, dtype=np.int64)
    codes = perms @ weights
    lookup = np.argsort(codes)
    sorted_codes = codes[lookup]

    def index_of(rows: np.ndarray) -> np.ndarray:
        return lookup[np.searchsorted(sorted_codes, rows @ weights)]

    composed = perms[np.arange(order)[:, None, None], perms[None, :, :]]
    mul = index_of(composed.reshape(-1, n)).reshape(order, order)
    rows, cols = np.nonzero(mul == IDENTITY)
    inv = np.empty(order, dtype=np.int64)
    inv[rows] = cols
    labels = {}
    for i in range(1, n):
        swap = np.arange(n)
        swap[[i - 1, i]] = swap[[i, i - 1]]
        labels[f"s{i}"] = int(index_of(swap[None, :])[0])
    handles = {"K1": (labels["s1"],), "K2": (labels["s2"],)} if n >= 3 else {}
    return GroupTable(name=f"symmetric-{n}", mul=mul, inv=inv, generator_labels=labels,
                      subgroup_handles=handles)


def build_dihedral(m: int) -> GroupTable:
    """Dihedral group of order 2m; ``r^k s^e`` sits at index ``k + m*e``.

    ``s`` and ``t = r*s`` are the two generating reflections (handles K1, K2).
    """
    if m < 2:
        raise GroupError(f"Dihedral groups need m >= 2, got {m}", {"m": m}, code="bad_parameter")

    def rule(i, j):
        k1, e1 = i % m, i // m
        k2, e2 = j % m, j // m
        sign = np.where(e1 == 1, -1, 1)
        return (k1 + sign * k2) % m + m * ((e1 + e2) % 2)

    mul, inv = _table_from_rule(f"D_{m}", 2 * m, rule)
    return GroupTable(
        name=f"dihedral-{2 * m}",
        mul=mul,
        inv=inv,
        generator_labels={"r": 1, "s": m, "t": 1 + m},
        subgroup_handles={"K1": (m,), "K2": (1 + m,)},
    )


def validate_table(table: GroupTable, seed: Optional[int] = None) -> None:
    """Check the group axioms on ``table``.

    Rows and columns must be permutations, index 0 must be a two-sided
    identity and ``inv`` must invert. Associativity is exhaustive up to
    EXHAUSTIVE_ASSOCIATIVITY_ORDER, sampled on random triples above.

    Raises:
        GroupError: On the first violated axiom.
    """
    order = table.order
    mul = table.mul
    idx = np.arange(order)
    if not (np.array_equal(mul[IDENTITY], idx) and np.array_equal(mul[:, IDENTITY], idx)):
        raise GroupError("Index 0 is not a two-sided identity", {"name": table.name}, code="bad_table")
    if not (np.all(np.sort(mul, axis=1) == idx) and np.all(np.sort(mul, axis=0) == idx[:, None])):
        raise GroupError("Table is not a Latin square", {"name": table.name}, code="bad_table")
    if not (np.all(mul[idx, table.inv] == IDENTITY) and np.all(mul[table.inv, idx] == IDENTITY)):
        raise GroupError("Inverse table is inconsistent", {"name": table.name}, code="bad_table")
    if order <= EXHAUSTIVE_ASSOCIATIVITY_ORDER:
        for a in range(order):
            left = mul[mul[a]]  # (a*b)*c over all b, c
            right = mul[a][mul]  # a*(b*c)
            if not np.array_equal(left, right):
                raise GroupError("Table is not associative", {"name": table.name, "a": a},
                                 code="not_associative")
    else:
        rng = make_rng(seed)
        a, b, c = rng.integers(0, order, size=(3, RANDOM_ASSOCIATIVITY_TRIPLES))
        if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
            raise GroupError("Table is not associative on sampled triples", {"name": table.name},
                             code="not_associative")


def _check_indices(parent: GroupTable, elements: Iterable[int]) -> List[int]:
    checked = []
    for g in elements:
        g = int(g)
        if not 0 <= g < parent.order:
            raise GroupError(f"Element index {g} out of range for order {parent.order}",
                             {"index": g, "order": parent.order}, code="bad_index")
        checked.append(g)
    return checked


def closure(parent: GroupTable, seeds: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing ``seeds`` (breadth-first under mul and inv)."""
    gens = _check_indices(parent, seeds)
    if not gens:
        raise GroupError("closure needs at least one seed", code="empty_seeds")
    step = sorted(set(gens) | {parent.inverse(g) for g in gens})
    seen = {IDENTITY}
    queue = deque([IDENTITY])
    while queue:
        g = queue.popleft()
        for s in step:
            h = int(parent.mul[g, s])
            if h not in seen:
                seen.add(h)
                queue.append(h)
    return Subgroup(parent=parent, elements=tuple(sorted(seen)))


def subgroup(parent: GroupTable, elements: Iterable[int]) -> Subgroup:
    """Validated subgroup from an explicit element set.

    Raises:
        GroupError: If the set is not closed, misses the identity or breaks Lagrange.
    """
    members = sorted(set(_check_indices(parent, elements)))
    arr = np.asarray(members, dtype=np.int64)
    if not members or members[0] != IDENTITY:
        raise GroupError("Subgroup must contain the identity", code="not_subgroup")
    if parent.order % len(members):
        raise GroupError(f"|K| = {len(members)} does not divide |G| = {parent.order}",
                         code="not_subgroup")
    products = parent.mul[np.ix_(arr, arr)]
    if not np.all(np.isin(products, arr)) or not np.all(np.isin(parent.inv[arr], arr)):
        raise GroupError("Element set is not closed under multiplication and inversion",
                         code="not_subgroup")
    return Subgroup(parent=parent, elements=tuple(members))


def intersection(a: Subgroup, b: Subgroup) -> Subgroup:
    if a.parent is not b.parent:
        raise GroupError("Subgroups live in different groups", code="parent_mismatch")
    common = np.intersect1d(a.as_array(), b.as_array())
    return Subgroup(parent=a.parent, elements=tuple(int(g) for g in common))


def center(table: GroupTable) -> Subgroup:
    central = np.nonzero(np.all(table.mul == table.mul.T, axis=1))[0]
    return Subgroup(parent=table, elements=tuple(int(g) for g in central))


def element_order(table: GroupTable, g: int) -> int:
    """Multiplicative order of ``g``."""
    h, n = int(g), 1
    while h != IDENTITY:
        h = int(table.mul[h, g])
        n += 1
    return n


def right_cosets(sub: Subgroup) -> RightCosetPartition:
    """Partition the parent into right cosets ``K g``."""
    parent = sub.parent
    members = sub.as_array()
    coset_of = np.full(parent.order, -1, dtype=np.int64)
    cosets: List[Tuple[int, ...]] = []
    for g in range(parent.order):
        if coset_of[g] >= 0:
            continue
        coset = np.sort(parent.mul[members, g])
        coset_of[coset] = len(cosets)
        cosets.append(tuple(int(h) for h in coset))
    coset_of.setflags(write=False)
    return RightCosetPartition(subgroup=sub, cosets=tuple(cosets), coset_of=coset_of)


def group_to_json(table: GroupTable) -> Dict[str, Any]:
    """Serialise ``table``; ``mul`` is row-major."""
    return {
        "name": table.name,
        "order": table.order,
        "mul": [int(v) for v in table.mul.ravel()],
        "generators": dict(table.generator_labels),
        "subgroups": {k: list(v) for k, v in table.subgroup_handles.items()},
    }


def group_from_json(data: Mapping[str, Any]) -> GroupTable:
    """Rebuild a table written by :func:`group_to_json` and validate it."""
    from pydantic import ValidationError

    from pydantic_models import GroupModel  # local import keeps pydantic out of hot paths

    try:
        model = GroupModel.model_validate(data)
    except ValidationError as e:
        raise GroupError(f"Malformed group JSON: {e.errors()[0]['msg']}", code="bad_table") from e
    mul = np.asarray(model.mul, dtype=np.int64).reshape(model.order, model.order)
    rows, cols = np.nonzero(mul == IDENTITY)
    if len(rows) != model.order:
        raise GroupError("Table rows do not each contain the identity once", code="bad_table")
    inv = np.empty(model.order, dtype=np.int64)
    inv[rows] = cols
    table = GroupTable(
        name=model.name,
        mul=mul,
        inv=inv,
        generator_labels=dict(model.generators),
        subgroup_handles={k: tuple(v) for k, v in model.subgroups.items()},
    )
    validate_table(table)
    return table


def build_named(kind: str, parameter: int) -> GroupTable:
    """Dispatch used by the CLI: ``heisenberg|product|sym|dihedral``."""
    builders = {
        "heisenberg": build_heisenberg,
        "product": build_elementary_abelian_pair,
        "sym": build_symmetric,
        "dihedral": build_dihedral,
    }
    if kind not in builders:
        raise GroupError(f"Unknown group kind {kind!r}", {"kinds": sorted(builders)}, code="bad_parameter")
    return builders[kind](parameter)


def pair_handles(table: GroupTable, names: Sequence[str] = ("K1", "K2")) -> Tuple[Subgroup, Subgroup]:
    """The (K1, K2) subgroup pair registered on ``table``."""
    return table.handle(names[0]), table.handle(names[1])
