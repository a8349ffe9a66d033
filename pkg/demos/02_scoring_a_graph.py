"""Scoring one UMAP graph: per-vertex values, quadrants, decomposition.

Builds the fuzzy-union neighborhood graph, scores it against the labels,
and walks through everything a report contains.  Per-vertex scores are
what you would export to color an external projection.
"""

import numpy as np

from relscore import MetricConfig, build_umap_graph, preset, report

data, labels = preset("three-blobs", seed=7)
graph = build_umap_graph(data, n_neighbors=15)
print(f"UMAP graph: {graph.n_vertices} vertices, {graph.n_edges} edges, "
      f"weights in ({graph.weights.min():.3g}, {graph.weights.max():.3g}]")

rep = report(graph, labels, MetricConfig(alpha=0.5, beta=1.0))

print(f"\nglobal: precision {rep.global_precision:.4f}  "
      f"recall {rep.global_recall:.4f}  f-score {rep.global_fscore:.4f}")

print("\nper label:")
for name, s in rep.per_label.items():
    print(f"  {name}: n={s.size}  P={s.precision:.4f}  R={s.recall:.4f}  "
          f"f={s.fscore:.4f}  [{s.quadrant}]")
    print(f"      {s.note}")
    shares = "  ".join(f"{o}:{v:.3f}" for o, v in s.fp_weight_shares.items())
    print(f"      same-label weight share {s.tp_weight_share:.3f}"
          + (f"; leaking to {shares}" if shares else "; no cross-label weight"))

worst = int(np.argmin(rep.vertex_fscore))
print(f"\nweakest vertex: id {worst} (label {labels.name_of(worst)}) with "
      f"P={rep.vertex_precision[worst]:.3f} "
      f"R={rep.vertex_recall[worst]:.3f} "
      f"f={rep.vertex_fscore[worst]:.3f}")
print("per-vertex rows feed `relscore export` / `score --per-vertex` for "
      "coloring projections in external tools.")
