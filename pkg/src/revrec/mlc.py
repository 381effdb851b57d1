"""Pluggable multi-label classification over document feature vectors.

Two built-in scorers: `network_head` reuses the encoder's sigmoid output
layer on document vectors, `knn` ranks labels by cosine-weighted votes of
the nearest training rows.  External extreme classifiers plug in through
the sparse dataset export and the score-file import, both bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from revrec.encoder.network import sigmoid
from revrec.encoder.params import ModelParams

MLC_KINDS = ("network_head", "knn")


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # zero rows stay zero: cosine with them is 0
    return matrix / norms


@dataclass
class KnnModel:
    """Cosine k-nearest-neighbour label scorer over normalized training rows."""

    matrix: np.ndarray  # (N, D), rows L2-normalized
    label_sets: list[frozenset[int]]
    num_labels: int
    k: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


@dataclass
class NetworkHeadModel:
    """The encoder's fully connected sigmoid layer as a stand-alone scorer."""

    w_out: np.ndarray
    b_out: np.ndarray

    @property
    def dim(self) -> int:
        return self.w_out.shape[1]

    @property
    def num_labels(self) -> int:
        return self.w_out.shape[0]


def train_mlc(
    kind: str,
    features,
    label_sets: Sequence[frozenset[int]] | None,
    *,
    num_labels: int | None = None,
    k: int = 10,
    encoder_params: ModelParams | None = None,
):
    """Build a scorer of the given kind from training features and label sets."""
    if kind == "network_head":
        if encoder_params is None:
            raise ValueError("network_head requires trained encoder params")
        return NetworkHeadModel(
            w_out=encoder_params.w_out.copy(), b_out=encoder_params.b_out.copy()
        )
    if kind == "knn":
        if features is None or label_sets is None:
            raise ValueError("knn requires training features and label sets")
        matrix = np.asarray(features, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise ValueError("empty training set")
        if matrix.shape[0] != len(label_sets):
            raise ValueError("feature rows and label sets must align")
        if num_labels is None:
            raise ValueError("knn requires num_labels")
        if k < 1:
            raise ValueError("k must be >= 1")
        return KnnModel(
            matrix=_unit_rows(matrix),
            label_sets=[frozenset(s) for s in label_sets],
            num_labels=num_labels,
            k=k,
        )
    raise ValueError(f"unknown mlc kind {kind!r}; expected one of {MLC_KINDS}")


def predict_scores(model, feature) -> np.ndarray:
    """Per-label relevance scores for one feature vector."""
    feature = np.asarray(feature, dtype=np.float64)
    if feature.shape != (model.dim,):
        raise ValueError(f"feature has shape {feature.shape}, expected ({model.dim},)")
    if isinstance(model, NetworkHeadModel):
        return sigmoid(model.w_out @ feature + model.b_out)
    if isinstance(model, KnnModel):
        norm = np.linalg.norm(feature)
        query = feature / norm if norm > 0.0 else feature
        cosines = model.matrix @ query
        k = min(model.k, len(model.label_sets))
        # stable sort on -cosine: ties resolve to the lower row index
        nearest = np.argsort(-cosines, kind="stable")[:k]
        scores = np.zeros(model.num_labels)
        for row in nearest:
            weight = max(float(cosines[row]), 0.0)
            if weight == 0.0:
                continue
            for label in model.label_sets[row]:
                scores[label] += weight
        return scores
    raise TypeError(f"unsupported model type {type(model).__name__}")


def top_k(scores, k: int) -> list[int]:
    """The k best label ids, descending score, ties by ascending label id."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= k <= scores.shape[0]:
        raise ValueError(f"k={k} out of range [1, {scores.shape[0]}]")
    order = np.argsort(-scores, kind="stable")
    return [int(i) for i in order[:k]]


# ---------------------------------------------------------------------------
# Sparse dataset interchange (external extreme classifiers)
# ---------------------------------------------------------------------------

def export_sparse_dataset(features, label_sets: Sequence[frozenset[int]], path, num_labels: int) -> None:
    """Write "N D |L|" then one "l1,l2 i:v i:v" line per row.

    Labels ascend; features keep only nonzeros, sorted by index, with
    shortest round-trip decimal values.  Rows without labels start
    directly at the feature field.
    """
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(label_sets):
        raise ValueError("features and label sets must align")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]} {num_labels}\n")
        for row, labels in zip(matrix, label_sets):
            fields = []
            if labels:
                fields.append(",".join(str(l) for l in sorted(labels)))
            fields.extend(f"{i}:{float(row[i])!r}" for i in np.flatnonzero(row))
            fh.write(" ".join(fields) + "\n")


def import_sparse_dataset(path):
    """Read a dataset written by export_sparse_dataset.

    Returns (features, label_sets, num_labels); lossless for all finite
    values.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}:1: malformed header, expected 'N D L'")
        try:
            n, dim, num_labels = (int(x) for x in header)
        except ValueError as exc:
            raise ValueError(f"{path}:1: malformed header, expected 'N D L'") from exc
        matrix = np.zeros((n, dim))
        label_sets: list[frozenset[int]] = []
        for lineno, line in enumerate(fh, 2):
            row = lineno - 2
            if row >= n:
                if line.strip():
                    raise ValueError(f"{path}:{lineno}: more rows than header declares")
                continue
            labels, pairs = _split_row(line.rstrip("\n"), path, lineno)
            label_sets.append(frozenset(labels))
            for idx, value in pairs:
                if not 0 <= idx < dim:
                    raise ValueError(f"{path}:{lineno}: feature index {idx} out of range")
                matrix[row, idx] = value
    if len(label_sets) != n:
        raise ValueError(f"{path}: expected {n} rows, found {len(label_sets)}")
    return matrix, label_sets, num_labels


def import_scores(path, num_labels: int | None = None) -> np.ndarray:
    """Read score rows of "idx:score" pairs into a dense (N, |L|) array.

    An optional "N L" header fixes the shape; otherwise num_labels is
    required.
    """
    rows: list[list[tuple[int, float]]] = []
    declared = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if lineno == 1 and stripped and ":" not in stripped:
                parts = stripped.split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:1: malformed header, expected 'N L'")
                declared = (int(parts[0]), int(parts[1]))
                continue
            labels, pairs = _split_row(line.rstrip("\n"), path, lineno)
            if labels:
                raise ValueError(f"{path}:{lineno}: unexpected label field in score file")
            rows.append(pairs)
    if declared is not None:
        n, num_labels = declared
        if len(rows) != n:
            raise ValueError(f"{path}: header declares {n} rows, found {len(rows)}")
    elif num_labels is None:
        raise ValueError(f"{path}: no header and no num_labels given")
    scores = np.zeros((len(rows), num_labels))
    for row, pairs in enumerate(rows):
        for idx, value in pairs:
            if not 0 <= idx < num_labels:
                raise ValueError(f"{path}: score index {idx} out of range on row {row}")
            scores[row, idx] = value
    return scores


def _split_row(line: str, path, lineno: int):
    """Split one row into (label ids, (index, value) pairs)."""
    tokens = line.split()
    labels: list[int] = []
    start = 0
    if tokens and ":" not in tokens[0]:
        try:
            labels = [int(l) for l in tokens[0].split(",")]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed label field {tokens[0]!r}") from exc
        start = 1
    pairs = []
    for token in tokens[start:]:
        try:
            idx, value = token.split(":")
            pairs.append((int(idx), float(value)))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed feature {token!r}") from exc
    return labels, pairs
