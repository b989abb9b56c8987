"""
Signed graph construction and analytics for hedgegraph

Graphs come from two places: a (possibly thresholded) estimator matrix, where
an edge carries the matrix entry, and a single day's cross-section of demeaned
returns, where every pair is joined and the edge is negative when the two
deviations have opposite signs.
"""

import logging
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd

from ..config.settings import settings
from ..models.estimate import CovEstimate, EstimateKind
from ..models.graph import Bipartition, Edge, EdgeSign, SignedGraph, TriangleCensus
from ..utils.error_handling import ErrorCode, ValidationError
from ..utils.vector_utils import format_float
from .estimators import check_taus

logger = logging.getLogger(__name__)


def _edges_from_pairs(rows, cols, weights) -> tuple[Edge, ...]:
    return tuple(
        Edge(
            i=int(i),
            j=int(j),
            weight=float(w),
            sign=EdgeSign.NEG if w < 0 else EdgeSign.POS,
        )
        for i, j, w in zip(rows, cols, weights, strict=True)
    )


def from_matrix(
    est: CovEstimate,
    taus: tuple[float, float] | None = None,
    zero_cutoff: float | None = None,
) -> SignedGraph:
    """
    Weighted signed graph of an estimator matrix.

    Without ``taus`` every off-diagonal entry with ``|x| > zero_cutoff`` is an
    edge. With ``(tau_plus, tau_minus)`` only entries above ``tau_plus``
    (positive) or below ``tau_minus`` (negative) are kept.
    """
    cutoff = settings.ZERO_EDGE_CUTOFF if zero_cutoff is None else zero_cutoff
    n = est.n_assets
    rows, cols = np.triu_indices(n, k=1)
    values = est.matrix[rows, cols]

    if taus is None:
        keep = np.abs(values) > cutoff
    else:
        tau_plus, tau_minus = taus
        check_taus(tau_plus, tau_minus)
        if est.kind != EstimateKind.CORRELATION:
            raise ValidationError(
                "Thresholded graphs need a correlation estimate",
                ErrorCode.WRONG_ESTIMATE_KIND,
            )
        keep = (values > tau_plus) | (values < tau_minus)

    return SignedGraph(
        n=n,
        edges=_edges_from_pairs(rows[keep], cols[keep], values[keep]),
        labels=est.tickers,
    )


def daily_sign_graph(
    deviations: np.ndarray, labels: tuple[str, ...] | None = None
) -> SignedGraph:
    """
    Complete signed graph of one day's demeaned returns.

    Edge (i, j) has weight d_i * d_j and is negative iff that product is < 0;
    a zero product is a positive edge.
    """
    d = np.asarray(deviations, dtype=float)
    if d.ndim != 1 or d.size < 2:
        raise ValidationError(
            "A daily graph needs at least 2 deviations", ErrorCode.TOO_FEW_ASSETS
        )
    if not np.all(np.isfinite(d)):
        raise ValidationError("Deviations must be finite")
    rows, cols = np.triu_indices(d.size, k=1)
    products = d[rows] * d[cols]
    return SignedGraph(
        n=int(d.size), edges=_edges_from_pairs(rows, cols, products), labels=labels
    )


def negative_degrees(g: SignedGraph) -> np.ndarray:
    """Count of negative edges at every vertex"""
    degrees = np.zeros(g.n, dtype=np.int64)
    for edge in g.edges:
        if edge.sign == EdgeSign.NEG:
            degrees[edge.i] += 1
            degrees[edge.j] += 1
    return degrees


def negative_degree(g: SignedGraph, v: int) -> int:
    if not 0 <= v < g.n:
        raise ValidationError(
            f"Vertex {v} outside 0..{g.n - 1}", ErrorCode.VERTEX_OUT_OF_RANGE
        )
    return int(negative_degrees(g)[v])


def triangle_census(g: SignedGraph) -> TriangleCensus:
    """
    Closed triangles bucketed by number of negative edges.

    Uses closed-walk traces: a triangle with edge signs (a, b, c) appears six
    times in trace(A^3); mixed products see a one-negative triangle twice.
    """
    signs = g.sign_matrix()
    pos = (signs == 1).astype(np.int64)
    neg = (signs == -1).astype(np.int64)
    ppp = int(np.trace(pos @ pos @ pos))
    nnn = int(np.trace(neg @ neg @ neg))
    ppn = int(np.trace(pos @ pos @ neg))
    nnp = int(np.trace(neg @ neg @ pos))
    return TriangleCensus(t0=ppp // 6, t1=ppn // 2, t2=nnp // 2, t3=nnn // 6)


def to_networkx(g: SignedGraph) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n))
    for edge in g.edges:
        graph.add_edge(edge.i, edge.j, weight=edge.weight, sign=edge.sign.value)
    return graph


def is_balanced(g: SignedGraph) -> Bipartition | None:
    """
    Two-colouring with positive edges inside and negative edges across parts,
    or ``None`` when the graph is unbalanced.
    """
    graph = to_networkx(g)
    side: dict[int, int] = {}
    for component in nx.connected_components(graph):
        root = min(component)
        side[root] = 0
        for u, v in nx.bfs_edges(graph, root):
            flip = graph[u][v]["sign"] == EdgeSign.NEG.value
            side[v] = side[u] ^ int(flip)

    for edge in g.edges:
        crosses = side[edge.i] != side[edge.j]
        if crosses != (edge.sign == EdgeSign.NEG):
            logger.debug("Unbalanced at edge (%d, %d)", edge.i, edge.j)
            return None

    return Bipartition(
        left=tuple(v for v in range(g.n) if side[v] == 0),
        right=tuple(v for v in range(g.n) if side[v] == 1),
    )


def _matrix_of(cov: CovEstimate | np.ndarray) -> np.ndarray:
    return cov.matrix if isinstance(cov, CovEstimate) else np.asarray(cov, dtype=float)


def portfolio_variance(cov: CovEstimate | np.ndarray, w: np.ndarray) -> float:
    """w' S w"""
    matrix = _matrix_of(cov)
    w = np.asarray(w, dtype=float)
    if matrix.shape != (w.size, w.size):
        raise ValidationError(
            f"Weights of length {w.size} against a {matrix.shape} matrix",
            ErrorCode.DIMENSION_MISMATCH,
        )
    return float(w @ matrix @ w)


def hedge_margin(cov: CovEstimate | np.ndarray, w: np.ndarray) -> float:
    """
    Risk removed by negative edges: w'|S|w - w'S w.

    Equals -2 * sum of w_i w_j S_ij over negative entries, so it is >= 0 for
    long-only weights.
    """
    matrix = _matrix_of(cov)
    return portfolio_variance(np.abs(matrix), w) - portfolio_variance(matrix, w)


def write_edge_list(g: SignedGraph, path: str | Path) -> Path:
    """Edge list CSV ``i,j,weight,sign``"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [(e.i, e.j, e.weight, e.sign.value) for e in g.edges],
        columns=["i", "j", "weight", "sign"],
    )
    frame.to_csv(
        path,
        index=False,
        float_format=format_float,
        lineterminator="\n",
    )
    return path


def graph_to_json_dict(
    g: SignedGraph,
    census: TriangleCensus | None = None,
    bipartition: Bipartition | None = None,
) -> dict:
    census = census or triangle_census(g)
    if bipartition is None:
        bipartition = is_balanced(g)
    return {
        "n": g.n,
        "labels": list(g.labels) if g.labels is not None else None,
        "edges": [edge.model_dump(mode="json") for edge in g.edges],
        "negative_degrees": negative_degrees(g).tolist(),
        "census": census.model_dump(),
        "balanced": bipartition is not None,
        "bipartition": bipartition.model_dump() if bipartition else None,
    }
