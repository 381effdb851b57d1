"""Ranking and assignment metrics: Recall@k, NDCG@k, and accuracy.

Recall@k is the fraction of a paper's true labels found in the top-k
prediction; NDCG@k discounts hits by log2(rank+1) and normalizes by the
ideal ranking truncated at min(k, number of true labels).  Accuracy is
the fraction of papers whose top recommended reviewer shares at least
one true label; the coarse variant re-judges that overlap after label
coarsening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Sequence

DEFAULT_K_GRID = (1, 3, 5, 7, 10, 13, 25, 50)


def recall_at_k(predicted_top_k: Sequence[int], true_labels: AbstractSet[int]) -> float:
    if not true_labels:
        raise ValueError("cannot normalize recall: empty true label set")
    return len(set(predicted_top_k) & set(true_labels)) / len(true_labels)


def dcg_at_k(predicted_ranked: Sequence[int], true_labels: AbstractSet[int], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    true = set(true_labels)
    return sum(
        1.0 / math.log2(rank + 1)
        for rank, label in enumerate(predicted_ranked[:k], start=1)
        if label in true
    )


def ndcg_at_k(predicted_ranked: Sequence[int], true_labels: AbstractSet[int], k: int) -> float:
    if not true_labels:
        raise ValueError("cannot normalize NDCG: empty true label set")
    ideal = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(k, len(true_labels)) + 1))
    return dcg_at_k(predicted_ranked, true_labels, k) / ideal


@dataclass(frozen=True)
class AssignmentOutcome:
    """Per-paper evaluation input: true labels vs the top reviewer's labels."""

    paper_id: str
    true_labels: frozenset[int]
    reviewer_labels: frozenset[int] | None
    no_overlap: bool = False


def accuracy(per_paper_results: Sequence[AssignmentOutcome]) -> float:
    """Fraction of papers whose top reviewer shares a true label.

    Papers flagged "no overlapping reviewer" count as failures.
    """
    if not per_paper_results:
        raise ValueError("no papers to evaluate")
    hits = 0
    for result in per_paper_results:
        if result.no_overlap or result.reviewer_labels is None:
            continue
        if result.true_labels & result.reviewer_labels:
            hits += 1
    return hits / len(per_paper_results)


def coarse_accuracy(
    per_paper_results: Sequence[AssignmentOutcome], strategy: int, taxonomy
) -> float:
    """Accuracy after coarsening both label sets with the given strategy."""
    if not per_paper_results:
        raise ValueError("no papers to evaluate")
    hits = 0
    for result in per_paper_results:
        if result.no_overlap or result.reviewer_labels is None:
            continue
        if taxonomy.coarse_match(result.true_labels, result.reviewer_labels, strategy):
            hits += 1
    return hits / len(per_paper_results)


@dataclass
class MetricsReport:
    ks: list[int]
    recall: list[float]
    ndcg: list[float]
    accuracy_value: float
    num_papers: int
    coarse: dict[int, float] = field(default_factory=dict)

    def as_kv_lines(self) -> str:
        lines = [f"papers={self.num_papers}"]
        for k, value in zip(self.ks, self.recall):
            lines.append(f"recall@{k}={value!r}")
        for k, value in zip(self.ks, self.ndcg):
            lines.append(f"ndcg@{k}={value!r}")
        lines.append(f"accuracy={self.accuracy_value!r}")
        for strategy in sorted(self.coarse):
            lines.append(f"coarse_accuracy_strategy{strategy}={self.coarse[strategy]!r}")
        return "\n".join(lines) + "\n"

    def as_table(self) -> str:
        header = ["metric"] + [f"@{k}" for k in self.ks]
        rows = [
            ["recall"] + [f"{v:.4f}" for v in self.recall],
            ["ndcg"] + [f"{v:.4f}" for v in self.ndcg],
        ]
        widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
        out = []
        for row in [header] + rows:
            out.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        out.append(f"accuracy: {self.accuracy_value:.4f}  (n={self.num_papers})")
        for strategy in sorted(self.coarse):
            out.append(f"coarse accuracy (strategy {strategy}): {self.coarse[strategy]:.4f}")
        return "\n".join(out) + "\n"


def aggregate_label_metrics(
    rankings: Sequence[Sequence[int]],
    true_label_sets: Sequence[AbstractSet[int]],
    ks: Sequence[int],
) -> tuple[list[float], list[float]]:
    """Mean Recall@k and NDCG@k over papers for every k in the grid."""
    if len(rankings) != len(true_label_sets) or not rankings:
        raise ValueError("rankings and label sets must align on a nonempty set")
    n = len(rankings)
    recalls = []
    ndcgs = []
    for k in ks:
        recalls.append(
            sum(recall_at_k(r[:k], t) for r, t in zip(rankings, true_label_sets)) / n
        )
        ndcgs.append(sum(ndcg_at_k(r, t, k) for r, t in zip(rankings, true_label_sets)) / n)
    return recalls, ndcgs
