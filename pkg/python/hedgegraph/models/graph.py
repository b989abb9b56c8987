"""
Signed graph models for hedgegraph
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..utils.error_handling import ErrorCode, ValidationError


class EdgeSign(str, Enum):
    POS = "pos"
    NEG = "neg"


class Edge(BaseModel):
    """Undirected signed edge with ``i < j``"""

    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    weight: float
    sign: EdgeSign

    @model_validator(mode="after")
    def _check_sign(self):
        if (self.sign == EdgeSign.NEG) != (self.weight < 0):
            raise ValidationError(
                f"Edge ({self.i},{self.j}) sign {self.sign.value} "
                f"disagrees with weight {self.weight}"
            )
        return self


class SignedGraph(BaseModel):
    """Vertex set 0..n-1 with a signed weighted edge set"""

    model_config = ConfigDict(frozen=True)

    n: int
    edges: tuple[Edge, ...] = ()
    labels: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def _check_edges(self):
        if self.labels is not None and len(self.labels) != self.n:
            raise ValidationError(
                f"{len(self.labels)} labels for {self.n} vertices",
                ErrorCode.DIMENSION_MISMATCH,
            )
        seen: set[tuple[int, int]] = set()
        for edge in self.edges:
            if not 0 <= edge.i < edge.j < self.n:
                raise ValidationError(
                    f"Edge ({edge.i},{edge.j}) must satisfy 0 <= i < j < {self.n}",
                    ErrorCode.VERTEX_OUT_OF_RANGE,
                )
            if (edge.i, edge.j) in seen:
                raise ValidationError(f"Duplicate edge ({edge.i},{edge.j})")
            seen.add((edge.i, edge.j))
        return self

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sign_matrix(self) -> np.ndarray:
        """n x n matrix with +1 / -1 on edges and 0 elsewhere"""
        signs = np.zeros((self.n, self.n), dtype=np.int8)
        for edge in self.edges:
            value = -1 if edge.sign == EdgeSign.NEG else 1
            signs[edge.i, edge.j] = signs[edge.j, edge.i] = value
        return signs

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)


class TriangleCensus(BaseModel):
    """Closed triangles bucketed by their number of negative edges"""

    model_config = ConfigDict(frozen=True)

    t0: int = 0
    t1: int = 0
    t2: int = 0
    t3: int = 0

    @property
    def total(self) -> int:
        return self.t0 + self.t1 + self.t2 + self.t3

    @property
    def balanced(self) -> int:
        return self.t0 + self.t2

    @property
    def unbalanced(self) -> int:
        return self.t1 + self.t3


class Bipartition(BaseModel):
    """Two-colouring witnessing structural balance"""

    model_config = ConfigDict(frozen=True)

    left: tuple[int, ...]
    right: tuple[int, ...]
