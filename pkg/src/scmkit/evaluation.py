"""Structure-recovery metrics and the end-to-end benchmark pipeline.

Discovery output and ground truth are both directed adjacency matrices over
the endogenous variables in lexicographic order.  Scoring counts every
ordered pair of distinct nodes once, so a correctly directed edge is a true
positive and a reversed edge counts one false positive plus one false
negative.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .distributions import DistributionSpec, RngState, gauss, keyed_stream
from .generate import FunctionClass, ScmGenConfig, create_from_graph, interaction, linear
from .graphs import CausalGraph, GraphGenConfig, generate_unique_graph_set

__all__ = [
    "DimensionMismatchError",
    "InsufficientDataError",
    "AdjacencyMatrix",
    "StructureMetrics",
    "graph_adjacency",
    "compare_structures",
    "corr_threshold_discovery",
    "UseCaseConfig",
    "run_usecase",
    "metrics_table",
]


class DimensionMismatchError(Exception):
    """Compared adjacency matrices cover different variables."""


class InsufficientDataError(Exception):
    """Too few rows to estimate anything."""


class AdjacencyMatrix:
    """0/1 directed adjacency over nodes in lexicographic order."""

    def __init__(self, names, matrix):
        names = tuple(names)
        if list(names) != sorted(names):
            raise ValueError("node names must be sorted")
        if len(set(names)) != len(names):
            raise ValueError("node names must be distinct")
        matrix = np.asarray(matrix, dtype=int)
        if matrix.shape != (len(names), len(names)):
            raise ValueError(f"matrix shape {matrix.shape} does not match {len(names)} names")
        if not np.isin(matrix, (0, 1)).all():
            raise ValueError("matrix entries must be 0 or 1")
        if np.diagonal(matrix).any():
            raise ValueError("diagonal must be zero")
        self.names = names
        self.matrix = matrix

    @classmethod
    def from_edges(cls, names, edges) -> "AdjacencyMatrix":
        names = tuple(sorted(names))
        index = {name: i for i, name in enumerate(names)}
        matrix = np.zeros((len(names), len(names)), dtype=int)
        for src, dst in edges:
            matrix[index[src], index[dst]] = 1
        return cls(names, matrix)

    def edges(self) -> list[tuple[str, str]]:
        return sorted(
            (self.names[i], self.names[j]) for i, j in zip(*np.nonzero(self.matrix))
        )

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"AdjacencyMatrix({len(self.names)} nodes, {int(self.matrix.sum())} edges)"


def graph_adjacency(graph: CausalGraph) -> AdjacencyMatrix:
    """Ground-truth adjacency of a graph's endogenous part.

    Exogenous nodes are dropped, so a hidden confounder contributes no
    edges; only direct endogenous-to-endogenous links count.
    """
    endo = set(graph.endo_nodes)
    edges = [(s, d) for s, d in graph.edges if s in endo and d in endo]
    return AdjacencyMatrix.from_edges(graph.endo_nodes, edges)


@dataclass(frozen=True)
class StructureMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    f1: float
    tpr: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "StructureMetrics":
        f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
        tpr = tp / (tp + fn) if tp + fn else 0.0
        return cls(tp, fp, fn, tn, f1, tpr)


def compare_structures(predicted: AdjacencyMatrix, truth: AdjacencyMatrix) -> StructureMetrics:
    """Score ``predicted`` against ``truth`` over all ordered node pairs."""
    if predicted.names != truth.names:
        raise DimensionMismatchError(
            f"predicted covers {predicted.names}, truth covers {truth.names}"
        )
    pred = predicted.matrix.astype(bool)
    true = truth.matrix.astype(bool)
    off_diagonal = ~np.eye(len(predicted.names), dtype=bool)
    tp = int((pred & true & off_diagonal).sum())
    fp = int((pred & ~true & off_diagonal).sum())
    fn = int((~pred & true & off_diagonal).sum())
    tn = int((~pred & ~true & off_diagonal).sum())
    return StructureMetrics.from_counts(tp, fp, fn, tn)


def corr_threshold_discovery(data: pd.DataFrame, threshold: float) -> AdjacencyMatrix:
    """Baseline discovery: edge where |pearson correlation| > threshold.

    Correlation is symmetric, so the edge is oriented from the
    lexicographically smaller name to the larger.  A deliberately weak
    reference point, not a real discovery algorithm.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if len(data) < 2:
        raise InsufficientDataError(f"need at least 2 rows, got {len(data)}")
    names = tuple(sorted(data.columns))
    values = data[list(names)].to_numpy(dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(values, rowvar=False)
    corr = np.nan_to_num(np.atleast_2d(corr), nan=0.0)
    matrix = np.zeros((len(names), len(names)), dtype=int)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if abs(corr[i, j]) > threshold:
                matrix[i, j] = 1
    return AdjacencyMatrix(names, matrix)


@dataclass(frozen=True)
class UseCaseConfig:
    """Configuration of the benchmark pipeline.

    ``scm_count`` is the total number of models, split as evenly as
    possible between the unconfounded and confounded regimes (any odd
    remainder goes to the unconfounded half).
    """

    n_endo: int = 4
    n_exo: int = 4
    scm_count: int = 30
    samples_per_scm: int = 100
    edge_prob: float = 0.5
    confounder_child_prob: float = 0.5
    corr_threshold: float = 0.5
    algorithms: tuple[str, ...] = ("corr_threshold",)
    function_classes: tuple[FunctionClass, ...] = (linear(), interaction())
    exo_spec: DistributionSpec = field(default_factory=lambda: gauss(0.0, 1.0))

    def __post_init__(self):
        if self.scm_count < 1:
            raise ValueError(f"scm_count must be >= 1, got {self.scm_count}")
        if self.samples_per_scm < 2:
            raise ValueError(f"samples_per_scm must be >= 2, got {self.samples_per_scm}")
        if not 0.0 < self.corr_threshold < 1.0:
            raise ValueError(f"corr_threshold must be in (0, 1), got {self.corr_threshold}")
        for algorithm in self.algorithms:
            if algorithm not in ("corr_threshold", "oracle"):
                raise ValueError(f"unknown algorithm {algorithm!r}")


def run_usecase(config: UseCaseConfig, rng: RngState) -> list[dict]:
    """Generate models, sample them, run discovery, and aggregate scores.

    Returns one record per regime and algorithm with the mean and sample
    standard deviation of F1 and TPR across that regime's models.  The whole
    pipeline is a pure function of (config, seed): substreams are keyed by
    regime and model index, so records are reproducible byte for byte.
    """
    root = rng.draw_key()
    half = (config.scm_count + 1) // 2
    regimes = [
        ("unconfounded", False, half),
        ("confounded", True, config.scm_count - half),
    ]
    records = []
    for regime, allow_confounders, count in regimes:
        if count == 0:
            continue
        graph_config = GraphGenConfig(
            n_endo=config.n_endo,
            n_exo=config.n_exo,
            allow_exo_confounders=allow_confounders,
            edge_prob=config.edge_prob,
            confounder_child_prob=config.confounder_child_prob,
        )
        scm_config = ScmGenConfig(graph_config, config.function_classes, config.exo_spec)
        graphs = generate_unique_graph_set(
            graph_config, count, keyed_stream(root, f"{regime}/graphs")
        )
        scores = {algorithm: [] for algorithm in config.algorithms}
        for index, graph in enumerate(graphs):
            stream = keyed_stream(root, f"{regime}/scm/{index}")
            model = create_from_graph(graph, scm_config, stream)
            samples = model.sample_many(stream, config.samples_per_scm)
            frame = pd.DataFrame(samples, columns=sorted(model.endogenous_names))
            truth = graph_adjacency(graph)
            for algorithm in config.algorithms:
                if algorithm == "oracle":
                    predicted = truth
                else:
                    predicted = corr_threshold_discovery(frame, config.corr_threshold)
                scores[algorithm].append(compare_structures(predicted, truth))
        for algorithm in config.algorithms:
            f1s = [m.f1 for m in scores[algorithm]]
            tprs = [m.tpr for m in scores[algorithm]]
            records.append(
                {
                    "regime": regime,
                    "algorithm": algorithm,
                    "n_scms": count,
                    "f1_mean": statistics.fmean(f1s),
                    "f1_sd": statistics.stdev(f1s) if len(f1s) > 1 else 0.0,
                    "tpr_mean": statistics.fmean(tprs),
                    "tpr_sd": statistics.stdev(tprs) if len(tprs) > 1 else 0.0,
                }
            )
    return records


def metrics_table(records: list[dict]) -> str:
    """Render benchmark records as an aligned text table."""
    header = ["regime", "algorithm", "n", "f1", "tpr"]
    rows = [header]
    for r in records:
        rows.append(
            [
                r["regime"],
                r["algorithm"],
                str(r["n_scms"]),
                f"{r['f1_mean']:.3f} +- {r['f1_sd']:.3f}",
                f"{r['tpr_mean']:.3f} +- {r['tpr_sd']:.3f}",
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
