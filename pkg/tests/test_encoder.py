import numpy as np
import pytest

from conftest import random_document, zero_gru_block
from oracles import flat_encode_document, naive_bce, scalar_gru_step
from revrec.corpus import Document
from revrec.encoder import (
    ModelDims,
    bce_loss,
    encode_document,
    encode_sentence,
    forward,
    gru_cell,
    init_params,
    load_params,
    save_params,
    sigmoid,
)


class TestGruCell:
    def test_zero_params_fixpoint(self):
        block = zero_gru_block(4, 3)
        x = np.array([1.0, -2.0, 0.5, 3.0])
        h = gru_cell(x, np.zeros(3), block)
        np.testing.assert_array_equal(h, np.zeros(3))

    def test_gate_convexity(self):
        rng = np.random.default_rng(7)
        dims = ModelDims(vocab_size=5, embed_dim=4, hidden_dim=3, attn_dim=3, num_labels=2)
        for _ in range(100):
            params = init_params(dims, rng, scale=1.0)
            x = rng.normal(size=4)
            h_prev = rng.normal(size=3)
            h = gru_cell(x, h_prev, params.word_fwd)
            # h_next = (1-z) h_prev + z h~ with h~ in (-1,1), z in (0,1)
            lower = np.minimum(h_prev, -1.0)
            upper = np.maximum(h_prev, 1.0)
            assert np.all(h > lower) and np.all(h < upper)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(9)
        dims = ModelDims(vocab_size=5, embed_dim=3, hidden_dim=3, attn_dim=3, num_labels=2)
        for _ in range(50):
            params = init_params(dims, rng, scale=0.8)
            x = rng.normal(size=3)
            h_prev = rng.normal(size=3)
            ours = gru_cell(x, h_prev, params.word_fwd)
            theirs = scalar_gru_step(params.word_fwd, list(x), list(h_prev))
            np.testing.assert_allclose(ours, theirs, rtol=0, atol=1e-12)

    def test_dimension_mismatch(self):
        block = zero_gru_block(4, 3)
        with pytest.raises(ValueError, match="shape"):
            gru_cell(np.zeros(5), np.zeros(3), block)
        with pytest.raises(ValueError, match="shape"):
            gru_cell(np.zeros(4), np.zeros(2), block)


class TestEncodeSentence:
    def test_single_token_weight_one(self, toy_params):
        s, weights = encode_sentence([3], toy_params)
        assert weights.shape == (1,)
        assert weights[0] == 1.0
        # s equals the lone concatenated forward/backward annotation
        x = toy_params.embedding[3]
        hf = gru_cell(x, np.zeros(3), toy_params.word_fwd)
        hb = gru_cell(x, np.zeros(3), toy_params.word_bwd)
        np.testing.assert_allclose(s, np.concatenate([hf, hb]), atol=1e-12)

    def test_identical_annotations_share_weight(self, toy_params):
        # zeroed word GRUs make both annotations equal, isolating the
        # softmax symmetry
        params = toy_params
        params.word_fwd = zero_gru_block(4, 3)
        params.word_bwd = zero_gru_block(4, 3)
        _, weights = encode_sentence([5, 5], params)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-12)

    def test_convex_combination_bound(self, toy_params):
        rng = np.random.default_rng(3)
        from revrec.encoder.network import _encode_sentence_cached

        for _ in range(50):
            ids = rng.integers(0, 20, size=int(rng.integers(2, 7)))
            s, _ = encode_sentence(ids, toy_params)
            _, _, cache = _encode_sentence_cached(np.asarray(ids), toy_params)
            states = cache[3][0]
            assert np.all(s >= states.min(axis=0) - 1e-12)
            assert np.all(s <= states.max(axis=0) + 1e-12)

    def test_empty_sentence_rejected(self, toy_params):
        with pytest.raises(ValueError, match="empty sentence"):
            encode_sentence([], toy_params)

    def test_out_of_vocabulary_index_rejected(self, toy_params):
        with pytest.raises(ValueError, match="out of vocabulary"):
            encode_sentence([25], toy_params)


class TestEncodeDocument:
    def test_single_sentence_weight_one(self, toy_params):
        doc = Document("d", ((1, 2, 3),))
        v, trace = encode_document(doc, toy_params)
        np.testing.assert_allclose(trace.sentence_weights, [1.0])
        s, _ = encode_sentence([1, 2, 3], toy_params)
        # with one sentence, v is that sentence's bi-GRU state, which is
        # only equal to s when the sentence GRUs are disabled
        params = toy_params
        params.sent_fwd = zero_gru_block(6, 3)
        params.sent_bwd = zero_gru_block(6, 3)
        v, _ = encode_document(doc, params)
        np.testing.assert_array_equal(v, np.zeros(6))

    def test_duplicated_sentence_weights(self, toy_params):
        params = toy_params
        params.sent_fwd = zero_gru_block(6, 3)
        params.sent_bwd = zero_gru_block(6, 3)
        doc = Document("d", ((4, 9), (4, 9)))
        _, trace = encode_document(doc, params)
        np.testing.assert_allclose(trace.sentence_weights, [0.5, 0.5], atol=1e-12)

    def test_matches_straight_line_oracle(self, toy_params):
        rng = np.random.default_rng(21)
        for _ in range(25):
            doc = random_document(rng, vocab_size=20)
            result = forward(doc, toy_params)
            v, scores, word_weights, sentence_weights = flat_encode_document(doc, toy_params)
            np.testing.assert_allclose(result.document_vector, v, atol=1e-10)
            np.testing.assert_allclose(result.scores, scores, atol=1e-10)
            np.testing.assert_allclose(result.trace.sentence_weights, sentence_weights, atol=1e-10)
            for ours, theirs in zip(result.trace.word_weights, word_weights):
                np.testing.assert_allclose(ours, theirs, atol=1e-10)

    def test_empty_document_rejected(self, toy_params):
        with pytest.raises(ValueError, match="empty document"):
            encode_document(Document("d", ()), toy_params)

    def test_pure_function(self, toy_params):
        doc = Document("d", ((1, 2), (3, 4, 5)))
        a = forward(doc, toy_params)
        b = forward(doc, toy_params)
        np.testing.assert_array_equal(a.document_vector, b.document_vector)
        np.testing.assert_array_equal(a.scores, b.scores)


class TestForwardHead:
    def test_zero_head_gives_half(self, toy_params):
        toy_params.w_out[:] = 0.0
        toy_params.b_out[:] = 0.0
        result = forward(Document("d", ((1, 2),)), toy_params)
        np.testing.assert_allclose(sigmoid(result.scores), 0.5)

    def test_saturated_bias(self, toy_params):
        toy_params.w_out[:] = 0.0
        toy_params.b_out[:] = 0.0
        toy_params.b_out[2] = 20.0
        result = forward(Document("d", ((1, 2),)), toy_params)
        probs = sigmoid(result.scores)
        assert probs[2] > 0.999999
        np.testing.assert_allclose(probs[[0, 1, 3]], 0.5)

    def test_probabilities_strictly_inside_unit_interval(self, toy_params):
        rng = np.random.default_rng(2)
        for _ in range(20):
            doc = random_document(rng, vocab_size=20)
            probs = sigmoid(forward(doc, toy_params).scores)
            assert np.all(probs > 0.0) and np.all(probs < 1.0)


class TestBceLoss:
    def test_analytic_value(self):
        loss = bce_loss([np.array([0.0, 0.0])], np.array([[1.0, 0.0]]))
        assert loss == pytest.approx(2.0 * np.log(2.0), abs=1e-12)

    def test_saturated_correct_limit(self):
        scores = np.array([40.0, -40.0])
        loss = bce_loss([scores], np.array([[1.0, 0.0]]))
        assert 0.0 <= loss < 1e-12

    def test_nonnegative_and_matches_naive(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(1, 8))
            scores = [rng.uniform(-10, 10, size=n) for _ in range(m)]
            labels = rng.integers(0, 2, size=(m, n)).astype(float)
            ours = bce_loss(scores, labels)
            assert ours >= 0.0
            assert ours == pytest.approx(naive_bce(scores, labels), abs=1e-9)

    def test_non_binary_labels_rejected(self):
        with pytest.raises(ValueError, match="binary"):
            bce_loss([np.zeros(2)], np.array([[0.5, 0.0]]))

    def test_batch_permutation_invariance(self):
        rng = np.random.default_rng(4)
        scores = [rng.uniform(-5, 5, size=6) for _ in range(8)]
        labels = rng.integers(0, 2, size=(8, 6)).astype(float)
        perm = rng.permutation(8)
        direct = bce_loss(scores, labels)
        shuffled = bce_loss([scores[i] for i in perm], labels[perm])
        assert direct == pytest.approx(shuffled, abs=1e-12)


class TestSoftmaxInvariants:
    def test_attention_weights_sum_to_one(self, toy_params):
        rng = np.random.default_rng(12)
        for _ in range(200):
            doc = random_document(rng, vocab_size=20)
            trace = forward(doc, toy_params).trace
            assert abs(trace.sentence_weights.sum() - 1.0) <= 1e-6
            assert np.all(trace.sentence_weights > 0.0)
            for weights in trace.word_weights:
                assert abs(weights.sum() - 1.0) <= 1e-6
                assert np.all(weights > 0.0)


class TestCheckpoint:
    def test_save_load_bit_exact(self, toy_params, tmp_path):
        path = tmp_path / "model.npz"
        save_params(toy_params, path)
        loaded = load_params(path)
        assert loaded.dims == toy_params.dims
        for (name_a, a), (name_b, b) in zip(toy_params.arrays(), loaded.arrays()):
            assert name_a == name_b
            np.testing.assert_array_equal(a, b)

    def test_save_bytes_reproducible(self, toy_params, tmp_path):
        p1, p2 = tmp_path / "a.npz", tmp_path / "b.npz"
        save_params(toy_params, p1)
        save_params(toy_params, p2)
        assert p1.read_bytes() == p2.read_bytes()
