"""TF-IDF weighted bag-of-words representation and cosine retrieval baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from revrec.corpus import Document
from revrec.assign import cosine


@dataclass
class TfidfModel:
    """Per-token idf = ln(N / df) over the fitted documents."""

    idf: np.ndarray  # (V,), zero for tokens never seen
    doc_count: int

    @property
    def vocab_size(self) -> int:
        return self.idf.shape[0]


@dataclass(frozen=True)
class RetrievalResult:
    reviewer_id: str | None
    similarity: float
    failed: bool


def fit_tfidf(documents: Sequence[Document], vocab_size: int) -> TfidfModel:
    """Count document frequencies and derive idf values."""
    if not documents:
        raise ValueError("empty corpus")
    df = np.zeros(vocab_size, dtype=np.int64)
    for doc in documents:
        seen: set[int] = set()
        for sentence in doc.sentences:
            seen.update(sentence)
        for token in seen:
            df[token] += 1
    idf = np.zeros(vocab_size)
    nonzero = df > 0
    idf[nonzero] = np.log(len(documents) / df[nonzero])
    return TfidfModel(idf=idf, doc_count=len(documents))


def tfidf_vector(document: Document, model: TfidfModel) -> np.ndarray:
    """Raw term count times idf; tokens unseen at fit time contribute 0."""
    vec = np.zeros(model.vocab_size)
    for sentence in document.sentences:
        for token in sentence:
            vec[token] += 1.0
    return vec * model.idf


def baseline_retrieve(
    paper_vector, reviewer_vectors: Sequence[tuple[str, np.ndarray]]
) -> RetrievalResult:
    """Most similar reviewer by cosine; an all-zero query is a flagged failure."""
    paper_vector = np.asarray(paper_vector, dtype=np.float64)
    if not reviewer_vectors:
        raise ValueError("no reviewers to retrieve from")
    if not np.any(paper_vector):
        return RetrievalResult(reviewer_id=None, similarity=0.0, failed=True)
    best_id = None
    best_sim = -math.inf
    for rid, vec in reviewer_vectors:
        sim = cosine(paper_vector, np.asarray(vec, dtype=np.float64))
        if sim > best_sim or (sim == best_sim and (best_id is None or rid < best_id)):
            best_id = rid
            best_sim = sim
    return RetrievalResult(reviewer_id=best_id, similarity=best_sim, failed=False)
