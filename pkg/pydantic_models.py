"""Pydantic models for validating JSON inputs and the run configuration.

These models are the wire schemas of the package: group tables, group
functions, projection families, generator schemes, link spectra and the
CLI's RunConfig. Library functions validate through them before building
their numpy-backed types.
"""
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from constants import CAYLEY_VERTEX_CAP, DEFAULT_SEED, DENSE_ORDER_CAP


class GroupModel(BaseModel):
    """A finite group as a row-major multiplication table."""

    name: str = Field(default="custom", description="Group identifier")
    order: int = Field(..., ge=1, description="Number of elements")
    mul: List[int] = Field(..., description="Row-major multiplication table")
    generators: Dict[str, int] = Field(default_factory=dict, description="Labelled elements")
    subgroups: Dict[str, List[int]] = Field(default_factory=dict, description="Subgroup handles by seeds")

    @model_validator(mode="after")
    def _table_shape(self) -> "GroupModel":
        if len(self.mul) != self.order * self.order:
            raise ValueError(f"mul has {len(self.mul)} entries, expected {self.order ** 2}")
        if any(not 0 <= v < self.order for v in self.mul):
            raise ValueError("mul entries must be element indices")
        return self


class GroupFunctionModel(BaseModel):
    group_id: str
    values: List[float]


class SpaceModel(BaseModel):
    """Finite-dimensional normed space of a projection family."""

    dim: int = Field(..., ge=1)
    p: float = Field(default=2.0, description="Exponent of the p-norm; use 'inf' for the max norm")
    weights: Optional[List[float]] = Field(default=None, description="Positive weights (weighted 2-norm)")

    @field_validator("p", mode="before")
    @classmethod
    def _parse_inf(cls, value):
        if isinstance(value, str) and value.lower() in {"inf", "infinity"}:
            return float("inf")
        return value

    @model_validator(mode="after")
    def _check(self) -> "SpaceModel":
        if not 1.0 <= self.p <= float("inf"):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        if self.weights is not None:
            if len(self.weights) != self.dim or any(w <= 0 for w in self.weights):
                raise ValueError("weights must be dim positive numbers")
        return self


class FamilyModel(BaseModel):
    """Projection family: ``meets`` keys are ``"i,j"`` with 0-based ``i < j``."""

    space: SpaceModel
    projections: List[List[List[float]]] = Field(..., min_length=1)
    meets: Optional[Dict[str, List[List[float]]]] = None

    @model_validator(mode="after")
    def _shapes(self) -> "FamilyModel":
        dim = self.space.dim
        for matrix in list(self.projections) + list((self.meets or {}).values()):
            if len(matrix) != dim or any(len(row) != dim for row in matrix):
                raise ValueError(f"every matrix must be {dim}x{dim}")
        for key in self.meets or {}:
            parts = key.split(",")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(f"meet key {key!r} must look like 'i,j'")
        return self


class PairDataModel(BaseModel):
    """Local data for one pair ``(i, j)`` of a generator scheme (1-based)."""

    pair: Tuple[int, int]
    kind: Literal["commuting", "heisenberg", "explicit", "link"]
    q: Optional[int] = None
    hilbert_cos: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    schatten: Optional[Dict[str, float]] = None
    eta2: Optional[float] = Field(default=None, gt=0.0, lt=2.0)
    v1_size: Optional[int] = Field(default=None, ge=1)
    v2_size: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _kind_fields(self) -> "PairDataModel":
        i, j = self.pair
        if not 1 <= i < j:
            raise ValueError(f"pair {self.pair} must satisfy 1 <= i < j")
        if self.kind == "heisenberg" and self.q is None:
            raise ValueError("heisenberg pairs need q")
        if self.kind == "explicit" and self.hilbert_cos is None:
            raise ValueError("explicit pairs need hilbert_cos")
        if self.kind == "link" and (self.eta2 is None or self.v1_size is None or self.v2_size is None):
            raise ValueError("link pairs need eta2, v1_size and v2_size")
        return self


class SchemeModel(BaseModel):
    n_generators: int = Field(..., ge=2)
    pairs: List[PairDataModel]
    link_rank: Optional[int] = Field(default=None, ge=2, description="n for link schemes (N = n + 1)")


class LinkPairModel(BaseModel):
    pair: Tuple[int, int]
    edges: Optional[List[Tuple[int, int]]] = None
    eta2: Optional[float] = None
    v1_size: int = Field(..., ge=1)
    v2_size: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _one_source(self) -> "LinkPairModel":
        if (self.edges is None) == (self.eta2 is None):
            raise ValueError("give exactly one of edges or eta2")
        return self


class CapsModel(BaseModel):
    dense_order: int = Field(default=DENSE_ORDER_CAP, ge=1)
    cayley_vertices: int = Field(default=CAYLEY_VERTEX_CAP, ge=1)


class RunConfig(BaseModel):
    """Validated configuration of one CLI run (flags merged over TOML)."""

    model_config = ConfigDict(extra="forbid")

    command: Literal["group", "angle", "iterate", "criterion", "expander"]
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2 ** 64)
    caps: CapsModel = Field(default_factory=CapsModel)
    output: Optional[str] = Field(default=None, description="Report path; stdout when absent")
    format: Literal["json", "text", "dot", "csv_edges"] = "json"
    options: Dict[str, object] = Field(default_factory=dict, description="Subcommand arguments")
