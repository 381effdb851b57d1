import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from revrec.corpus import Document
from revrec.encoder import GruBlock, ModelDims, init_params


@pytest.fixture
def toy_dims():
    return ModelDims(vocab_size=20, embed_dim=4, hidden_dim=3, attn_dim=3, num_labels=4)


@pytest.fixture
def toy_params(toy_dims):
    return init_params(toy_dims, np.random.default_rng(11), scale=0.3)


def random_document(rng, vocab_size, max_sentences=4, max_tokens=6, owner="doc"):
    n_sentences = int(rng.integers(1, max_sentences + 1))
    sentences = tuple(
        tuple(int(t) for t in rng.integers(0, vocab_size, size=int(rng.integers(1, max_tokens + 1))))
        for _ in range(n_sentences)
    )
    return Document(owner_id=owner, sentences=sentences)


def zero_gru_block(input_dim, hidden_dim):
    return GruBlock(
        w_z=np.zeros((hidden_dim, input_dim)),
        u_z=np.zeros((hidden_dim, hidden_dim)),
        b_z=np.zeros(hidden_dim),
        w_r=np.zeros((hidden_dim, input_dim)),
        u_r=np.zeros((hidden_dim, hidden_dim)),
        b_r=np.zeros(hidden_dim),
        w_h=np.zeros((hidden_dim, input_dim)),
        u_h=np.zeros((hidden_dim, hidden_dim)),
        b_h=np.zeros(hidden_dim),
    )
