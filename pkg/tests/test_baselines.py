import numpy as np
import pytest

from revrec.baselines import baseline_retrieve, fit_tfidf, tfidf_vector
from revrec.corpus import Document


def doc(owner, *sentences):
    return Document(owner, tuple(tuple(s) for s in sentences))


class TestFitTfidf:
    def test_token_in_every_document_has_zero_idf(self):
        docs = [doc("a", [2, 3]), doc("b", [2]), doc("c", [2, 4])]
        model = fit_tfidf(docs, vocab_size=5)
        assert model.idf[2] == 0.0

    def test_rare_token_idf(self):
        docs = [doc("a", [2]), doc("b", [3]), doc("c", [3]), doc("d", [3])]
        model = fit_tfidf(docs, vocab_size=4)
        assert model.idf[2] == pytest.approx(np.log(4.0), abs=1e-12)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty corpus"):
            fit_tfidf([], vocab_size=3)

    def test_matches_direct_count_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            vocab_size = int(rng.integers(3, 12))
            docs = [
                doc(f"d{i}", [int(t) for t in rng.integers(0, vocab_size, size=int(rng.integers(1, 8)))])
                for i in range(int(rng.integers(1, 10)))
            ]
            model = fit_tfidf(docs, vocab_size)
            for token in range(vocab_size):
                df = sum(1 for d in docs if any(token in s for s in d.sentences))
                expected = 0.0 if df == 0 else np.log(len(docs) / df)
                assert model.idf[token] == pytest.approx(expected, abs=1e-12)

    def test_deterministic(self):
        docs = [doc("a", [2, 3, 2]), doc("b", [3])]
        a = fit_tfidf(docs, 5)
        b = fit_tfidf(docs, 5)
        np.testing.assert_array_equal(a.idf, b.idf)


class TestTfidfVector:
    def test_count_times_idf(self):
        model = fit_tfidf([doc("a", [2]), doc("b", [3])], vocab_size=4)
        # token 2 appears twice; idf = ln(2/1)
        vec = tfidf_vector(doc("q", [2, 2]), model)
        assert vec[2] == pytest.approx(2.0 * np.log(2.0), abs=1e-12)

    def test_unseen_tokens_ignored(self):
        model = fit_tfidf([doc("a", [2])], vocab_size=5)
        vec = tfidf_vector(doc("q", [3, 4, 4]), model)
        np.testing.assert_array_equal(vec, np.zeros(5))

    def test_matches_hand_multiplication(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            vocab_size = int(rng.integers(3, 10))
            corpus = [doc(f"d{i}", [int(t) for t in rng.integers(0, vocab_size, size=5)])
                      for i in range(4)]
            model = fit_tfidf(corpus, vocab_size)
            query = [int(t) for t in rng.integers(0, vocab_size, size=int(rng.integers(1, 9)))]
            vec = tfidf_vector(doc("q", query), model)
            for token in range(vocab_size):
                assert vec[token] == pytest.approx(query.count(token) * model.idf[token], abs=1e-12)


class TestBaselineRetrieve:
    def test_identical_text_retrieved_first(self):
        corpus = [doc("r0", [2, 3, 4]), doc("r1", [5, 6]), doc("r2", [2, 7])]
        model = fit_tfidf(corpus, vocab_size=8)
        vectors = [(d.owner_id, tfidf_vector(d, model)) for d in corpus]
        result = baseline_retrieve(tfidf_vector(doc("q", [5, 6]), model), vectors)
        assert result.reviewer_id == "r1" and not result.failed

    def test_all_zero_query_flagged(self):
        corpus = [doc("r0", [2])]
        model = fit_tfidf(corpus, vocab_size=6)
        vectors = [(d.owner_id, tfidf_vector(d, model)) for d in corpus]
        result = baseline_retrieve(np.zeros(6), vectors)
        assert result.failed and result.reviewer_id is None

    def test_scaling_invariance(self):
        rng = np.random.default_rng(11)
        vectors = [(f"r{j}", rng.random(6)) for j in range(10)]
        query = rng.random(6)
        a = baseline_retrieve(query, vectors)
        b = baseline_retrieve(query * 12.5, [(rid, v * 3.0) for rid, v in vectors])
        assert a.reviewer_id == b.reviewer_id

    def test_matches_brute_force_choice(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            vectors = [(f"r{j:02d}", rng.normal(size=5)) for j in range(50)]
            query = rng.normal(size=5)
            result = baseline_retrieve(query, vectors)

            def cos(a, b):
                na, nb = np.linalg.norm(a), np.linalg.norm(b)
                return 0.0 if na == 0 or nb == 0 else float(a @ b / (na * nb))

            expected = min(vectors, key=lambda item: (-cos(query, item[1]), item[0]))[0]
            assert result.reviewer_id == expected

    def test_tie_break_by_reviewer_id(self):
        vectors = [("z", np.array([1.0, 0.0])), ("a", np.array([2.0, 0.0]))]
        result = baseline_retrieve(np.array([3.0, 0.0]), vectors)
        assert result.reviewer_id == "a"
