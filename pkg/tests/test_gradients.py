"""Finite-difference verification of the analytic gradients."""

import numpy as np

from revrec.corpus import Document
from revrec.encoder import (
    ModelDims,
    bce_loss,
    forward,
    init_params,
    loss_and_gradients,
    param_gradients,
)

H = 1e-5
RTOL = 1e-4
# central differences bottom out near eps*|loss|/h ~ 1e-10, so coordinates
# of negligible magnitude are held to an absolute tolerance instead
ATOL = 1e-9


def batch_loss(documents, labels, params):
    return bce_loss([forward(d, params).scores for d in documents], labels)


def toy_problem(seed=11, scale=0.3):
    dims = ModelDims(vocab_size=20, embed_dim=4, hidden_dim=3, attn_dim=3, num_labels=4)
    params = init_params(dims, np.random.default_rng(seed), scale=scale)
    docs = [
        Document("d0", ((1, 5, 7), (2, 2, 9, 4), (11,))),
        Document("d1", ((3, 8), (6, 1, 1))),
    ]
    labels = np.array([[1, 0, 0, 1], [0, 1, 0, 0]], dtype=float)
    return docs, labels, params


def check_all_coordinates(docs, labels, params):
    _, grads = loss_and_gradients(docs, labels, params)
    failures = []
    for (name, p), (_, g) in zip(params.arrays(), grads.arrays()):
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + H
            up = batch_loss(docs, labels, params)
            p[idx] = orig - H
            down = batch_loss(docs, labels, params)
            p[idx] = orig
            numeric = (up - down) / (2.0 * H)
            analytic = g[idx]
            tol = ATOL + RTOL * max(abs(numeric), abs(analytic))
            if abs(numeric - analytic) > tol:
                failures.append((name, idx, analytic, numeric))
    return failures


def test_gradients_match_central_differences():
    docs, labels, params = toy_problem()
    failures = check_all_coordinates(docs, labels, params)
    assert not failures, f"{len(failures)} coordinates disagree, first: {failures[0]}"


def test_gradients_match_at_training_scale_init():
    docs, labels, params = toy_problem(seed=3, scale=0.05)
    failures = check_all_coordinates(docs, labels, params)
    assert not failures, f"{len(failures)} coordinates disagree, first: {failures[0]}"


def test_untouched_embedding_rows_have_zero_gradient():
    docs, labels, params = toy_problem()
    grads = param_gradients(docs, labels, params)
    used = {t for d in docs for s in d.sentences for t in s}
    for row in range(params.dims.vocab_size):
        if row not in used:
            np.testing.assert_array_equal(grads.embedding[row], 0.0)
        else:
            assert np.any(grads.embedding[row] != 0.0)


def test_saturated_label_contributes_vanishing_gradient():
    # when a label's probability sits at its target, the head bias
    # gradient for that label vanishes
    docs, labels, params = toy_problem()
    params.w_out[:] = 0.0
    params.b_out[:] = 0.0
    params.b_out[0] = 40.0   # probability ~ 1
    params.b_out[1] = -40.0  # probability ~ 0
    labels = np.array([[1, 0, 1, 0], [1, 0, 1, 1]], dtype=float)
    grads = param_gradients(docs, labels, params)
    assert abs(grads.b_out[0]) < 1e-12
    assert abs(grads.b_out[1]) < 1e-12
    assert abs(grads.b_out[2]) > 1e-3


def test_gradient_structure_congruent():
    docs, labels, params = toy_problem()
    grads = param_gradients(docs, labels, params)
    for (name_p, p), (name_g, g) in zip(params.arrays(), grads.arrays()):
        assert name_p == name_g
        assert p.shape == g.shape
        assert np.all(np.isfinite(g))
