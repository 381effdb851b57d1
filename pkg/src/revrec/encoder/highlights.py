"""Attention-based transparency: which tokens and sentences carry a document."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from revrec.corpus import Document, Vocabulary
from revrec.encoder.network import forward
from revrec.encoder.params import ModelParams

DEFAULT_THRESHOLD = 0.1


@dataclass
class HighlightReport:
    """Flags and the descending (token, weight) ranking for one document."""

    token_flags: list[list[bool]]
    sentence_flags: list[bool]
    # (sentence_index, position, token_id, weight), heaviest first
    ranked_tokens: list[tuple[int, int, int, float]]
    sentence_weights: np.ndarray


def attention_highlights(
    document: Document, params: ModelParams, threshold: float = DEFAULT_THRESHOLD
) -> HighlightReport:
    """Flag tokens and sentences whose attention weight exceeds the threshold."""
    result = forward(document, params)
    trace = result.trace
    token_flags = [list(w > threshold) for w in trace.word_weights]
    sentence_flags = list(trace.sentence_weights > threshold)
    ranked = [
        (si, ti, token_id, float(weight))
        for si, (sentence, weights) in enumerate(zip(document.sentences, trace.word_weights))
        for ti, (token_id, weight) in enumerate(zip(sentence, weights))
    ]
    ranked.sort(key=lambda item: (-item[3], item[0], item[1]))
    return HighlightReport(
        token_flags=token_flags,
        sentence_flags=sentence_flags,
        ranked_tokens=ranked,
        sentence_weights=trace.sentence_weights,
    )


def format_attention_trace(
    document: Document, params: ModelParams, vocabulary: Vocabulary
) -> str:
    """Trace export: one (sentence_index, token, weight) triple per line."""
    result = forward(document, params)
    tokens = vocabulary.index_to_token()
    lines = []
    for si, (sentence, weights) in enumerate(zip(document.sentences, result.trace.word_weights)):
        for token_id, weight in zip(sentence, weights):
            lines.append(f"{si}\t{tokens[token_id]}\t{float(weight)!r}")
    return "\n".join(lines) + "\n"
