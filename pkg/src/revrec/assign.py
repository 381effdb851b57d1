"""Reviewer assignment by label overlap, plus the cosine-similarity baseline.

For a paper, every reviewer gets an overlap count beta = |top-k
predicted labels ∩ reviewer labels|; the candidate set holds all
reviewers attaining the maximum, ranked by descending total label
count with reviewer-id tie-breaks.  Papers whose maximum is zero are
flagged so callers can reject the fallback ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Sequence

import numpy as np

from revrec.mlc import top_k

DEFAULT_ASSIGN_K = 5


@dataclass(frozen=True)
class Candidate:
    reviewer_id: str
    beta: int
    label_count: int


@dataclass
class Recommendation:
    paper_id: str
    predicted_top_k: list[int]
    beta_star: int
    candidates: list[Candidate]
    no_overlap: bool

    @property
    def top_reviewer(self) -> Candidate | None:
        return self.candidates[0] if self.candidates else None


def beta(predicted_top_k: Iterable[int], reviewer_label_set: AbstractSet[int]) -> int:
    """Number of predicted top-k labels the reviewer actually holds."""
    return len(set(predicted_top_k) & set(reviewer_label_set))


def mlbra(
    paper_scores,
    reviewers: Sequence[tuple[str, AbstractSet[int]]],
    k: int = DEFAULT_ASSIGN_K,
    paper_id: str = "",
    excluded: AbstractSet[str] = frozenset(),
) -> Recommendation:
    """Rank reviewers for one paper by overlap with its top-k predicted labels.

    `reviewers` are (reviewer_id, label_set) pairs; `excluded` ids are
    dropped before ranking (optional conflict screening).
    """
    pool = [(rid, labels) for rid, labels in reviewers if rid not in excluded]
    if not pool:
        raise ValueError("no reviewers to rank")
    predicted = top_k(paper_scores, k)
    predicted_set = set(predicted)
    betas = [len(predicted_set & set(labels)) for _, labels in pool]
    beta_star = max(betas)
    if beta_star == 0:
        chosen = list(range(len(pool)))
    else:
        chosen = [j for j, b in enumerate(betas) if b == beta_star]
    candidates = [
        Candidate(reviewer_id=pool[j][0], beta=betas[j], label_count=len(pool[j][1]))
        for j in chosen
    ]
    candidates.sort(key=lambda c: (-c.label_count, c.reviewer_id))
    return Recommendation(
        paper_id=paper_id,
        predicted_top_k=predicted,
        beta_star=beta_star,
        candidates=candidates,
        no_overlap=beta_star == 0,
    )


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; pairs involving a zero vector score 0."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


def similar_reviewers(
    paper_vector,
    reviewer_vectors: Sequence[tuple[str, np.ndarray]],
    n: int = 5,
) -> list[tuple[str, float]]:
    """Top-n reviewers by cosine similarity to the paper vector."""
    if n < 1:
        raise ValueError("n must be >= 1")
    paper_vector = np.asarray(paper_vector, dtype=np.float64)
    scored = [(rid, cosine(paper_vector, np.asarray(vec, dtype=np.float64)))
              for rid, vec in reviewer_vectors]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:n]


# ---------------------------------------------------------------------------
# Assignment report: paper_id <TAB> beta_star <TAB> id:beta:label_count;...
# ---------------------------------------------------------------------------

def write_assignment_report(recommendations: Sequence[Recommendation], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in recommendations:
            cands = ";".join(
                f"{c.reviewer_id}:{c.beta}:{c.label_count}" for c in rec.candidates
            )
            fh.write(f"{rec.paper_id}\t{rec.beta_star}\t{cands}\n")


def read_assignment_report(path) -> list[Recommendation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                paper_id, beta_star, cand_field = line.split("\t")
                candidates = []
                if cand_field:
                    for chunk in cand_field.split(";"):
                        rid, b, count = chunk.rsplit(":", 2)
                        candidates.append(
                            Candidate(reviewer_id=rid, beta=int(b), label_count=int(count))
                        )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed assignment line") from exc
            out.append(
                Recommendation(
                    paper_id=paper_id,
                    predicted_top_k=[],
                    beta_star=int(beta_star),
                    candidates=candidates,
                    no_overlap=int(beta_star) == 0,
                )
            )
    return out
