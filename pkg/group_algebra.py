"""Real group algebra of a finite group.

Functions on a group are convolved against the uniform probability
measure: ``(f*g)(h) = (1/|G|) sum_s f(s) g(s^-1 h)``. With that
normalisation the averaging element of a subgroup ``K`` takes the value
``|G|/|K|`` on ``K``, has mass one, and acts in every representation as
the projection onto ``K``-invariant vectors.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np

from atomic_io import write_atomic
from constants import DENSE_ORDER_CAP, FLOAT_SIGNIFICANT_DIGITS, IDEMPOTENT_TOL
from errors import AlgebraError
from finite_group import GroupTable, Subgroup, right_cosets

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """A real-valued function on ``group``, stored as a read-only vector."""

    group: GroupTable
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.group.order,):
            raise AlgebraError(f"Expected {self.group.order} values, got shape {values.shape}",
                               code="bad_shape")
        if not np.all(np.isfinite(values)):
            raise AlgebraError("Group function values must be finite", code="not_finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def mass(self) -> float:
        """Integral against the Haar probability measure."""
        return float(self.values.sum() / self.group.order)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """True when ``f(g) = f(g^-1)`` for all ``g`` (up to ``tol``)."""
        return bool(np.all(np.abs(self.values - self.values[self.group.inv]) <= tol))

    def _check_same_group(self, other: "GroupFunction") -> None:
        if other.group is not self.group:
            raise AlgebraError("Group functions live on different groups",
                               {"left": self.group.name, "right": other.group.name},
                               code="group_mismatch")

    def __add__(self, other: "GroupFunction") -> "GroupFunction":
        self._check_same_group(other)
        return GroupFunction(self.group, self.values + other.values)

    def __sub__(self, other: "GroupFunction") -> "GroupFunction":
        self._check_same_group(other)
        return GroupFunction(self.group, self.values - other.values)

    def __neg__(self) -> "GroupFunction":
        return GroupFunction(self.group, -self.values)

    def scale(self, factor: float) -> "GroupFunction":
        return GroupFunction(self.group, factor * self.values)

    def allclose(self, other: "GroupFunction", atol: float = 1e-12) -> bool:
        self._check_same_group(other)
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))


@dataclass(frozen=True, eq=False)
class RegularRepMatrix:
    """Matrix of ``pi(f)`` in the left regular representation."""

    group: GroupTable
    matrix: np.ndarray

    def rank(self, tol: float = IDEMPOTENT_TOL) -> int:
        return int(np.linalg.matrix_rank(self.matrix, tol=tol))

    def is_idempotent(self, tol: float = IDEMPOTENT_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix @ self.matrix - self.matrix)) <= tol)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)


def delta(group: GroupTable, g: int) -> GroupFunction:
    """Indicator of the single element ``g``."""
    values = np.zeros(group.order)
    values[g] = 1.0
    return GroupFunction(group, values)


def unit(group: GroupTable) -> GroupFunction:
    """Convolution unit ``|G| * delta_e``."""
    return delta(group, group.identity).scale(float(group.order))


def averaging_idempotent(sub: Subgroup) -> GroupFunction:
    """The element ``k_K``: ``|G|/|K|`` on ``K``, zero elsewhere."""
    if sub.order == 0:
        raise AlgebraError("Subgroup is empty", code="empty_subgroup")
    group = sub.parent
    values = np.zeros(group.order)
    values[sub.as_array()] = group.order / sub.order
    return GroupFunction(group, values)


def convolve(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """Convolution product ``f * g`` (only the support of ``f`` is visited)."""
    f._check_same_group(g)
    group = f.group
    support = np.nonzero(f.values)[0]
    if support.size == 0:
        return GroupFunction(group, np.zeros(group.order))
    # shifted[s, h] = g(s^-1 h)
    shifted = g.values[group.mul[group.inv[support]]]
    return GroupFunction(group, f.values[support] @ shifted / group.order)


def involution(f: GroupFunction) -> GroupFunction:
    """``f*(g) = f(g^-1)`` (real scalars, so no conjugation)."""
    return GroupFunction(f.group, f.values[f.group.inv])


def left_translation(group: GroupTable, g: int) -> np.ndarray:
    """Permutation matrix of ``lambda(g)``: ``(lambda(g) phi)(h) = phi(g^-1 h)``."""
    matrix = np.zeros((group.order, group.order))
    cols = np.arange(group.order)
    matrix[group.mul[g, cols], cols] = 1.0
    return matrix


def regular_rep(f: GroupFunction, cap: int = DENSE_ORDER_CAP) -> RegularRepMatrix:
    """Dense matrix of ``lambda(f) = (1/|G|) sum_g f(g) lambda(g)``.

    Entry ``[h, x]`` is ``f(h x^-1) / |G|``, so ``regular_rep(f) @ phi``
    is the convolution ``f * phi``.

    Raises:
        AlgebraError: If the group order exceeds ``cap``.
    """
    group = f.group
    if group.order > cap:
        raise AlgebraError(f"Group order {group.order} exceeds the dense matrix cap {cap}",
                           {"order": group.order, "cap": cap}, code="cap_exceeded")
    matrix = f.values[group.mul[:, group.inv]] / group.order
    return RegularRepMatrix(group=group, matrix=matrix)


def invariant_subspace_basis(sub: Subgroup) -> np.ndarray:
    """Orthonormal columns spanning the left-``K``-invariant functions.

    A function is fixed by every ``lambda(k)`` exactly when it is constant
    on each right coset ``K h``; the normalised coset indicators form the basis.
    """
    partition = right_cosets(sub)
    basis = np.zeros((sub.parent.order, len(partition)))
    for column, coset in enumerate(partition.cosets):
        basis[list(coset), column] = 1.0 / np.sqrt(len(coset))
    return basis


def function_to_json(f: GroupFunction) -> Dict[str, Any]:
    return {"group_id": f.group.name, "values": [float(v) for v in f.values]}


def function_from_json(data: Mapping[str, Any], group: GroupTable) -> GroupFunction:
    """Rebuild a group function, checking it belongs to ``group``."""
    from pydantic_models import GroupFunctionModel

    model = GroupFunctionModel.model_validate(data)
    if model.group_id != group.name:
        raise AlgebraError(f"Function belongs to {model.group_id!r}, not {group.name!r}",
                           code="group_mismatch")
    return GroupFunction(group, np.asarray(model.values, dtype=np.float64))


def export_matrix_csv(rep: RegularRepMatrix, path: str, digits: Optional[int] = None) -> None:
    """Write the matrix as CSV with round-trip precision."""
    fmt = f"%.{digits or FLOAT_SIGNIFICANT_DIGITS}g"
    buffer = io.StringIO()
    np.savetxt(buffer, rep.matrix, delimiter=",", fmt=fmt)
    write_atomic(path, buffer.getvalue())
    logger.debug("Wrote %dx%d matrix to %s", rep.matrix.shape[0], rep.matrix.shape[1], path)
