"""Supervised precision/recall/f-score over a labeled relationship graph.

Precision weighs neighbors by edge weight (attraction strength); recall
counts vertices only, blending two notions of "missing": same-label
vertices with no direct edge versus same-label vertices outside the
vertex's intra-label connected component.  Aggregates average per label
first, then across labels, so class imbalance cannot dominate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, LabelAssignment
from .graphs import (
    GraphError,
    GraphProvenance,
    RelationshipGraph,
    build_tsne_graph,
    build_umap_graph,
)

__all__ = [
    "MetricsError",
    "MetricConfig",
    "VertexTallies",
    "ComponentAssignment",
    "LabelSummary",
    "MetricReport",
    "SweepRow",
    "SweepResult",
    "classify_neighbors",
    "intra_label_components",
    "precision_vertex",
    "recall_vertex",
    "fscore_vertex",
    "report",
    "sweep",
    "write_vertex_csv",
    "write_sweep_csv",
]


class MetricsError(ValueError):
    """Inconsistent metric inputs or invalid configuration."""


@dataclass(frozen=True)
class MetricConfig:
    """alpha blends the two false-negative notions; beta balances P vs R.

    quadrant_threshold splits per-label precision/recall into the low/high
    interpretation quadrants (low < threshold <= high).
    """

    alpha: float = 1.0
    beta: float = 1.0
    quadrant_threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise MetricsError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.beta > 0.0:
            raise MetricsError(f"beta must be positive, got {self.beta}")
        if not 0.0 < self.quadrant_threshold < 1.0:
            raise MetricsError(
                f"quadrant_threshold must be in (0, 1), got {self.quadrant_threshold}"
            )


@dataclass(frozen=True)
class VertexTallies:
    """Neighborhood partition of one vertex plus its false-negative counts."""

    vertex: int
    tp_ids: tuple[int, ...]
    fp_ids: tuple[int, ...]
    tp_weight: float
    fp_weight: float
    fn_edge_count: int
    fn_component_count: int


@dataclass(frozen=True)
class ComponentAssignment:
    """Connected components after deleting every inter-label edge.

    Component ids are canonical: the smallest member vertex id.
    """

    component_ids: np.ndarray

    def __post_init__(self):
        ids = np.array(self.component_ids, dtype=np.int64)
        ids.setflags(write=False)
        object.__setattr__(self, "component_ids", ids)

    def size_of(self, vertex: int) -> int:
        return int(np.count_nonzero(self.component_ids == self.component_ids[vertex]))

    def sizes(self) -> np.ndarray:
        """Component size per vertex."""
        counts = np.bincount(self.component_ids, minlength=self.component_ids.size)
        return counts[self.component_ids]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]  # path halving
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra > rb:
                ra, rb = rb, ra
            self.parent[rb] = ra  # smaller root wins: canonical min member


def _check_cover(graph: RelationshipGraph, labels: LabelAssignment) -> None:
    if labels.n != graph.n_vertices:
        raise MetricsError(
            f"label count {labels.n} != graph vertex count {graph.n_vertices}"
        )


def intra_label_components(graph: RelationshipGraph,
                           labels: LabelAssignment) -> ComponentAssignment:
    """Union-find over same-label edges only; every component is label-pure."""
    _check_cover(graph, labels)
    lab = labels.labels
    uf = _UnionFind(graph.n_vertices)
    intra = lab[graph.edges_i] == lab[graph.edges_j]
    for a, b in zip(graph.edges_i[intra].tolist(), graph.edges_j[intra].tolist()):
        uf.union(a, b)
    component_ids = np.fromiter(
        (uf.find(v) for v in range(graph.n_vertices)),
        dtype=np.int64,
        count=graph.n_vertices,
    )
    return ComponentAssignment(component_ids)


def classify_neighbors(graph: RelationshipGraph, labels: LabelAssignment,
                       vertex: int,
                       components: ComponentAssignment | None = None) -> VertexTallies:
    """Partition the vertex's neighborhood by label equality.

    Weights accumulate in ascending neighbor-id order.  Pass precomputed
    components to avoid an O(V+E) pass per call.
    """
    _check_cover(graph, labels)
    n = graph.n_vertices
    vertex = int(vertex)
    if not 0 <= vertex < n:
        raise MetricsError(f"vertex {vertex} outside 0..{n - 1}")
    offsets, neighbors, weights = graph.adjacency()
    seg = slice(offsets[vertex], offsets[vertex + 1])
    ids = neighbors[seg]
    ws = weights[seg]
    same = labels.labels[ids] == labels.labels[vertex]
    same_total = int(np.count_nonzero(labels.labels == labels.labels[vertex]))
    if components is None:
        components = intra_label_components(graph, labels)
    return VertexTallies(
        vertex=vertex,
        tp_ids=tuple(int(i) for i in ids[same]),
        fp_ids=tuple(int(i) for i in ids[~same]),
        tp_weight=float(np.sum(ws[same])),
        fp_weight=float(np.sum(ws[~same])),
        fn_edge_count=same_total - 1 - int(np.count_nonzero(same)),
        fn_component_count=same_total - components.size_of(vertex),
    )


def precision_vertex(tallies: VertexTallies) -> float:
    """Weighted share of same-label attraction; 1 for an isolated vertex."""
    if len(tallies.tp_ids) + len(tallies.fp_ids) == 0:
        return 1.0
    return tallies.tp_weight / (tallies.tp_weight + tallies.fp_weight)


def recall_vertex(tallies: VertexTallies, alpha: float) -> float:
    """Cardinality-based recall blending the two false-negative counts.

    1 when the vertex's label has no other member.
    """
    if not 0.0 <= alpha <= 1.0:
        raise MetricsError(f"alpha must be in [0, 1], got {alpha}")
    tp = len(tallies.tp_ids)
    fn = tallies.fn_edge_count
    fnc = tallies.fn_component_count
    if tp + fn == 0:
        return 1.0
    # denominator arranged as tp + fnc + alpha*(fn - fnc): same value as
    # tp + alpha*fn + (1-alpha)*fnc but exactly nonincreasing in alpha
    # under round-to-nearest
    return tp / (tp + fnc + alpha * (fn - fnc))


def fscore_vertex(precision: float, recall: float, beta: float) -> float:
    """Weighted harmonic mean of precision and recall; 0 at P = R = 0."""
    if not beta > 0:
        raise MetricsError(f"beta must be positive, got {beta}")
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise MetricsError("precision and recall must lie in [0, 1]")
    b2 = beta * beta
    den = b2 * precision + recall
    if den == 0.0:
        return 0.0
    return (b2 + 1.0) * precision * recall / den


@dataclass(frozen=True)
class _GraphStats:
    """One pass of per-vertex tallies shared by every metric."""

    n: int
    label_ids: np.ndarray
    vocabulary: tuple[str, ...]
    present: np.ndarray        # label ids with at least one member
    tp_weight: np.ndarray
    fp_weight: np.ndarray
    tp_count: np.ndarray
    degree: np.ndarray
    fn_edge: np.ndarray
    fn_component: np.ndarray
    label_weight: np.ndarray   # (L, L): incident weight by (own, neighbor) label


def _compute_stats(graph: RelationshipGraph, labels: LabelAssignment) -> _GraphStats:
    _check_cover(graph, labels)
    n = graph.n_vertices
    lab = labels.labels
    n_labels = len(labels.vocabulary)
    # directed view sorted by (source, neighbor): bincount then accumulates
    # each vertex's weights in ascending neighbor-id order
    src = np.concatenate([graph.edges_i, graph.edges_j])
    dst = np.concatenate([graph.edges_j, graph.edges_i])
    w = np.concatenate([graph.weights, graph.weights])
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    same = lab[src] == lab[dst]
    tp_weight = np.bincount(src[same], weights=w[same], minlength=n)
    fp_weight = np.bincount(src[~same], weights=w[~same], minlength=n)
    tp_count = np.bincount(src[same], minlength=n)
    degree = np.bincount(src, minlength=n)
    same_total = np.bincount(lab, minlength=n_labels)[lab]
    fn_edge = same_total - 1 - tp_count
    comp_sizes = intra_label_components(graph, labels).sizes()
    fn_component = same_total - comp_sizes
    pair_key = lab[src] * n_labels + lab[dst]
    label_weight = np.bincount(
        pair_key, weights=w, minlength=n_labels * n_labels
    ).reshape(n_labels, n_labels)
    return _GraphStats(
        n=n,
        label_ids=lab,
        vocabulary=labels.vocabulary,
        present=np.flatnonzero(np.bincount(lab, minlength=n_labels)),
        tp_weight=tp_weight,
        fp_weight=fp_weight,
        tp_count=tp_count,
        degree=degree,
        fn_edge=fn_edge,
        fn_component=fn_component,
        label_weight=label_weight,
    )


def _precision_array(stats: _GraphStats) -> np.ndarray:
    out = np.ones(stats.n)
    denom = stats.tp_weight + stats.fp_weight
    np.divide(stats.tp_weight, denom, out=out, where=stats.degree > 0)
    return out


def _recall_array(stats: _GraphStats, alpha: float) -> np.ndarray:
    tp = stats.tp_count.astype(float)
    fn = stats.fn_edge.astype(float)
    fnc = stats.fn_component.astype(float)
    out = np.ones(stats.n)
    denom = tp + fnc + alpha * (fn - fnc)
    np.divide(tp, denom, out=out, where=(stats.tp_count + stats.fn_edge) > 0)
    return out


def _fscore_array(precision: np.ndarray, recall: np.ndarray, beta: float) -> np.ndarray:
    b2 = beta * beta
    num = (b2 + 1.0) * precision * recall
    den = b2 * precision + recall
    out = np.zeros(precision.size)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _balanced_mean(values) -> float:
    # label-balanced aggregate: summing the per-label values in ascending
    # numeric order makes the result independent of vocabulary order
    v = np.sort(np.asarray(values, dtype=float))
    return float(v.sum() / v.size)


_QUADRANT_NOTES = {
    ("low", "low"): "neighborhoods mix labels and same-label vertices stay fragmented",
    ("high", "low"): "neighborhoods match labels but the label splits into several groups",
    ("low", "high"): "the label hangs together but its neighborhoods pull in other labels",
    ("high", "high"): "neighborhoods match labels and the label forms one coherent group",
}


@dataclass(frozen=True)
class LabelSummary:
    """Per-label means, weight decomposition, and interpretation quadrant.

    tp_weight_share and fp_weight_shares decompose the weight incident to
    the label's vertices: the same-label share and the cross-label share
    by offending label (only nonzero entries).  A label whose vertices
    carry no weight at all gets tp_weight_share 1, mirroring the isolated
    vertex convention for precision.
    """

    label: str
    size: int
    precision: float
    recall: float
    fscore: float
    tp_weight_share: float
    fp_weight_shares: dict[str, float]
    quadrant: str
    note: str


@dataclass(frozen=True)
class MetricReport:
    """Per-vertex scores, per-label summaries, and label-balanced globals."""

    config: MetricConfig
    provenance: GraphProvenance
    n_vertices: int
    n_edges: int
    labels: LabelAssignment
    vertex_precision: np.ndarray
    vertex_recall: np.ndarray
    vertex_fscore: np.ndarray
    per_label: dict[str, LabelSummary]
    global_precision: float
    global_recall: float
    global_fscore: float

    def to_dict(self) -> dict:
        return {
            "config": {
                "alpha": self.config.alpha,
                "beta": self.config.beta,
                "quadrant_threshold": self.config.quadrant_threshold,
            },
            "graph": {
                "method": self.provenance.method,
                "param": self.provenance.param,
                "options": self.provenance.options,
                "n_vertices": self.n_vertices,
                "n_edges": self.n_edges,
            },
            "global": {
                "precision": self.global_precision,
                "recall": self.global_recall,
                "fscore": self.global_fscore,
            },
            "labels": {
                name: {
                    "size": s.size,
                    "precision": s.precision,
                    "recall": s.recall,
                    "fscore": s.fscore,
                    "tp_weight_share": s.tp_weight_share,
                    "fp_weight_shares": s.fp_weight_shares,
                    "quadrant": s.quadrant,
                    "note": s.note,
                }
                for name, s in self.per_label.items()
            },
        }

    def vertex_rows(self):
        """(id, label, precision, recall, fscore) per vertex, ascending id."""
        for v in range(self.n_vertices):
            yield (
                v,
                self.labels.name_of(v),
                float(self.vertex_precision[v]),
                float(self.vertex_recall[v]),
                float(self.vertex_fscore[v]),
            )


def _label_summaries(stats: _GraphStats, precision, recall, fscore,
                     threshold: float) -> dict[str, LabelSummary]:
    out: dict[str, LabelSummary] = {}
    for lid in stats.present.tolist():
        members = np.flatnonzero(stats.label_ids == lid)
        p = float(precision[members].mean())
        r = float(recall[members].mean())
        f = float(fscore[members].mean())
        row = stats.label_weight[lid]
        # ascending-value sum: the total cannot shift under relabeling
        total = float(np.sort(row).sum())
        if total > 0.0:
            tp_share = float(row[lid]) / total
            fp_shares = {
                stats.vocabulary[other]: float(row[other]) / total
                for other in range(row.size)
                if other != lid and row[other] > 0.0
            }
        else:
            tp_share = 1.0
            fp_shares = {}
        p_side = "high" if p >= threshold else "low"
        r_side = "high" if r >= threshold else "low"
        name = stats.vocabulary[lid]
        out[name] = LabelSummary(
            label=name,
            size=int(members.size),
            precision=p,
            recall=r,
            fscore=f,
            tp_weight_share=tp_share,
            fp_weight_shares=fp_shares,
            quadrant=f"precision-{p_side}/recall-{r_side}",
            note=_QUADRANT_NOTES[(p_side, r_side)],
        )
    return out


def report(graph: RelationshipGraph, labels: LabelAssignment,
           config: MetricConfig = MetricConfig()) -> MetricReport:
    """Score the whole graph: per vertex, per label, and globally."""
    stats = _compute_stats(graph, labels)
    precision = _precision_array(stats)
    recall = _recall_array(stats, config.alpha)
    fscore = _fscore_array(precision, recall, config.beta)
    per_label = _label_summaries(
        stats, precision, recall, fscore, config.quadrant_threshold
    )
    summaries = list(per_label.values())
    return MetricReport(
        config=config,
        provenance=graph.provenance,
        n_vertices=graph.n_vertices,
        n_edges=graph.n_edges,
        labels=labels,
        vertex_precision=precision,
        vertex_recall=recall,
        vertex_fscore=fscore,
        per_label=per_label,
        global_precision=_balanced_mean([s.precision for s in summaries]),
        global_recall=_balanced_mean([s.recall for s in summaries]),
        global_fscore=_balanced_mean([s.fscore for s in summaries]),
    )


@dataclass(frozen=True)
class SweepRow:
    k: float
    precision: float | None
    recall_a0: float | None
    recall_a1: float | None
    fscore: float | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    method: str
    config: MetricConfig
    rows: tuple[SweepRow, ...]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "config": {"alpha": self.config.alpha, "beta": self.config.beta},
            "rows": [
                {
                    "k": row.k,
                    "precision": row.precision,
                    "recall_a0": row.recall_a0,
                    "recall_a1": row.recall_a1,
                    "fscore": row.fscore,
                    "error": row.error,
                }
                for row in self.rows
            ],
        }


def _build_graph(method: str, dataset: Dataset, k, prune_eps):
    if method == "tsne":
        return build_tsne_graph(dataset, float(k), prune_eps)
    if method == "umap":
        if int(k) != k:
            raise GraphError(f"n_neighbors must be an integer, got {k}")
        return build_umap_graph(dataset, int(k))
    raise MetricsError(f"method must be 'tsne' or 'umap', got {method!r}")


def _global_triple(stats: _GraphStats, config: MetricConfig):
    """(precision, recall_a0, recall_a1, fscore) label-balanced globals."""
    precision = _precision_array(stats)
    recall_cfg = _recall_array(stats, config.alpha)
    fscore = _fscore_array(precision, recall_cfg, config.beta)
    recall_a0 = _recall_array(stats, 0.0)
    recall_a1 = _recall_array(stats, 1.0)
    per = {"p": [], "r0": [], "r1": [], "f": []}
    for lid in stats.present.tolist():
        members = np.flatnonzero(stats.label_ids == lid)
        per["p"].append(float(precision[members].mean()))
        per["r0"].append(float(recall_a0[members].mean()))
        per["r1"].append(float(recall_a1[members].mean()))
        per["f"].append(float(fscore[members].mean()))
    return (
        _balanced_mean(per["p"]),
        _balanced_mean(per["r0"]),
        _balanced_mean(per["r1"]),
        _balanced_mean(per["f"]),
    )


def sweep(dataset: Dataset, labels: LabelAssignment, method: str, k_values,
          config: MetricConfig = MetricConfig(),
          prune_eps: float | None = None) -> SweepResult:
    """Global metrics per neighborhood size, one row per distinct k.

    A failing build annotates its row instead of aborting the sweep.
    """
    if method not in ("tsne", "umap"):
        raise MetricsError(f"method must be 'tsne' or 'umap', got {method!r}")
    ks = sorted(dict.fromkeys(k_values))
    rows = []
    for k in ks:
        try:
            graph = _build_graph(method, dataset, k, prune_eps)
            stats = _compute_stats(graph, labels)
            p, r0, r1, f = _global_triple(stats, config)
            rows.append(SweepRow(k, p, r0, r1, f))
        except (GraphError, MetricsError) as exc:
            rows.append(SweepRow(k, None, None, None, None, str(exc)))
    return SweepResult(method=method, config=config, rows=tuple(rows))


def write_vertex_csv(rep: MetricReport, path) -> None:
    """Per-vertex scores for external tools (projection coloring etc.)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "precision", "recall", "fscore"])
        for vid, name, p, r, f in rep.vertex_rows():
            writer.writerow([vid, name, repr(p), repr(r), repr(f)])


def write_sweep_csv(result: SweepResult, path) -> None:
    """k,precision,recall_a0,recall_a1,fscore; failed rows leave blanks."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "precision", "recall_a0", "recall_a1", "fscore"])
        for row in result.rows:
            if row.error is None:
                writer.writerow([
                    row.k,
                    repr(row.precision),
                    repr(row.recall_a0),
                    repr(row.recall_a1),
                    repr(row.fscore),
                ])
            else:
                writer.writerow([row.k, "", "", "", ""])
