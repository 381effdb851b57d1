import numpy as np

from conftest import zero_gru_block
from revrec.corpus import Document, Vocabulary
from revrec.encoder import (
    ModelDims,
    attention_highlights,
    forward,
    format_attention_trace,
    init_params,
)


def flat_attention_params(dims, seed=2):
    # zeroed word GRUs make every annotation in a sentence identical, so
    # word-attention weights are exactly uniform
    params = init_params(dims, np.random.default_rng(seed), scale=0.3)
    params.word_fwd = zero_gru_block(dims.embed_dim, dims.hidden_dim)
    params.word_bwd = zero_gru_block(dims.embed_dim, dims.hidden_dim)
    return params


DIMS = ModelDims(vocab_size=25, embed_dim=4, hidden_dim=3, attn_dim=3, num_labels=2)


def test_uniform_weights_below_threshold_yield_no_token_highlights():
    params = flat_attention_params(DIMS)
    doc = Document("d", (tuple(range(20)),))
    report = attention_highlights(doc, params, threshold=0.1)
    assert report.token_flags == [[False] * 20]
    # every uniform weight is exactly 1/20
    assert all(abs(w - 0.05) < 1e-12 for _, _, _, w in report.ranked_tokens)


def test_single_token_sentence_always_highlighted():
    params = init_params(DIMS, np.random.default_rng(5), scale=0.3)
    doc = Document("d", ((7,), (1, 2, 3, 4)))
    report = attention_highlights(doc, params, threshold=0.1)
    assert report.token_flags[0] == [True]


def test_ranked_tokens_sorted_descending():
    params = init_params(DIMS, np.random.default_rng(8), scale=0.5)
    doc = Document("d", ((3, 9, 1), (4, 4, 12, 6)))
    report = attention_highlights(doc, params)
    weights = [w for _, _, _, w in report.ranked_tokens]
    assert weights == sorted(weights, reverse=True)
    assert len(report.ranked_tokens) == doc.num_tokens


def test_sentence_flags_match_trace():
    params = init_params(DIMS, np.random.default_rng(9), scale=0.5)
    doc = Document("d", ((3, 9), (4, 12), (1, 2, 5)))
    report = attention_highlights(doc, params, threshold=0.2)
    trace = forward(doc, params).trace
    assert report.sentence_flags == list(trace.sentence_weights > 0.2)


def test_trace_export_format():
    params = init_params(DIMS, np.random.default_rng(3), scale=0.3)
    vocab = Vocabulary({"<pad>": 0, "<unk>": 1, **{f"tok{i}": i for i in range(2, 25)}})
    doc = Document("d", ((2, 3), (4,)))
    text = format_attention_trace(doc, params, vocab)
    lines = text.splitlines()
    assert len(lines) == 3
    si, token, weight = lines[0].split("\t")
    assert si == "0" and token == "tok2" and 0.0 < float(weight) <= 1.0
    assert lines[2].startswith("1\ttok4\t")
    # one sentence of one token: its weight is exactly 1
    assert float(lines[2].split("\t")[2]) == 1.0
