"""Parameter containers, initialization, and lossless checkpointing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

CHECKPOINT_VERSION = 1


@dataclass
class ModelDims:
    """Network dimensions: V, d_e, d_h (per direction), d_a, |L|."""

    vocab_size: int
    embed_dim: int = 100
    hidden_dim: int = 50
    attn_dim: int = 100
    num_labels: int = 1

    def __post_init__(self):
        for name in ("vocab_size", "embed_dim", "hidden_dim", "attn_dim", "num_labels"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class GruBlock:
    """Update/reset/candidate weights of one GRU direction.

    w_* map the input (hidden, input), u_* map the previous hidden state
    (hidden, hidden), b_* are biases (hidden,).
    """

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.w_z.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]


@dataclass
class AttentionParams:
    """Perceptron (w, b) plus context vector u of one attention level."""

    w: np.ndarray  # (attn_dim, in_dim)
    b: np.ndarray  # (attn_dim,)
    u: np.ndarray  # (attn_dim,)


@dataclass
class ModelParams:
    """All trainable tensors of the two-level attention encoder."""

    dims: ModelDims
    embedding: np.ndarray  # (V, d_e)
    word_fwd: GruBlock
    word_bwd: GruBlock
    word_attn: AttentionParams
    sent_fwd: GruBlock
    sent_bwd: GruBlock
    sent_attn: AttentionParams
    w_out: np.ndarray  # (|L|, 2*d_h)
    b_out: np.ndarray  # (|L|,)

    def arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        """Yield (name, tensor) pairs in a fixed order."""
        yield "embedding", self.embedding
        for block_name in ("word_fwd", "word_bwd", "sent_fwd", "sent_bwd"):
            block = getattr(self, block_name)
            for gate in ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h"):
                yield f"{block_name}.{gate}", getattr(block, gate)
        for attn_name in ("word_attn", "sent_attn"):
            attn = getattr(self, attn_name)
            for part in ("w", "b", "u"):
                yield f"{attn_name}.{part}", getattr(attn, part)
        yield "w_out", self.w_out
        yield "b_out", self.b_out


def _uniform_block(rng, input_dim: int, hidden_dim: int, scale: float) -> GruBlock:
    def w():
        return rng.uniform(-scale, scale, size=(hidden_dim, input_dim))

    def u():
        return rng.uniform(-scale, scale, size=(hidden_dim, hidden_dim))

    def b():
        return rng.uniform(-scale, scale, size=hidden_dim)

    return GruBlock(w_z=w(), u_z=u(), b_z=b(), w_r=w(), u_r=u(), b_r=b(), w_h=w(), u_h=u(), b_h=b())


def _uniform_attention(rng, in_dim: int, attn_dim: int, scale: float) -> AttentionParams:
    return AttentionParams(
        w=rng.uniform(-scale, scale, size=(attn_dim, in_dim)),
        b=rng.uniform(-scale, scale, size=attn_dim),
        u=rng.uniform(-scale, scale, size=attn_dim),
    )


def init_params(dims: ModelDims, rng: np.random.Generator, scale: float = 0.05) -> ModelParams:
    """Uniform(-scale, scale) initialization of every tensor."""
    two_h = 2 * dims.hidden_dim
    return ModelParams(
        dims=dims,
        embedding=rng.uniform(-scale, scale, size=(dims.vocab_size, dims.embed_dim)),
        word_fwd=_uniform_block(rng, dims.embed_dim, dims.hidden_dim, scale),
        word_bwd=_uniform_block(rng, dims.embed_dim, dims.hidden_dim, scale),
        word_attn=_uniform_attention(rng, two_h, dims.attn_dim, scale),
        sent_fwd=_uniform_block(rng, two_h, dims.hidden_dim, scale),
        sent_bwd=_uniform_block(rng, two_h, dims.hidden_dim, scale),
        sent_attn=_uniform_attention(rng, two_h, dims.attn_dim, scale),
        w_out=rng.uniform(-scale, scale, size=(dims.num_labels, two_h)),
        b_out=rng.uniform(-scale, scale, size=dims.num_labels),
    )


def zeros_like_params(params: ModelParams) -> ModelParams:
    """A congruent parameter structure filled with zeros (gradient buffer)."""

    def zblock(block: GruBlock) -> GruBlock:
        return GruBlock(**{k: np.zeros_like(getattr(block, k)) for k in (
            "w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")})

    def zattn(attn: AttentionParams) -> AttentionParams:
        return AttentionParams(w=np.zeros_like(attn.w), b=np.zeros_like(attn.b), u=np.zeros_like(attn.u))

    return ModelParams(
        dims=params.dims,
        embedding=np.zeros_like(params.embedding),
        word_fwd=zblock(params.word_fwd),
        word_bwd=zblock(params.word_bwd),
        word_attn=zattn(params.word_attn),
        sent_fwd=zblock(params.sent_fwd),
        sent_bwd=zblock(params.sent_bwd),
        sent_attn=zattn(params.sent_attn),
        w_out=np.zeros_like(params.w_out),
        b_out=np.zeros_like(params.b_out),
    )


def save_params(params: ModelParams, path) -> None:
    """Write a versioned checkpoint; load_params round-trips bit-exactly."""
    d = params.dims
    arrays = {name: arr for name, arr in params.arrays()}
    np.savez(
        path,
        __version__=np.int64(CHECKPOINT_VERSION),
        __dims__=np.array(
            [d.vocab_size, d.embed_dim, d.hidden_dim, d.attn_dim, d.num_labels], dtype=np.int64
        ),
        **arrays,
    )


def load_params(path) -> ModelParams:
    with np.load(path) as data:
        version = int(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        dims = ModelDims(*(int(x) for x in data["__dims__"]))

        def block(prefix: str) -> GruBlock:
            return GruBlock(**{k: data[f"{prefix}.{k}"] for k in (
                "w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")})

        def attn(prefix: str) -> AttentionParams:
            return AttentionParams(w=data[f"{prefix}.w"], b=data[f"{prefix}.b"], u=data[f"{prefix}.u"])

        return ModelParams(
            dims=dims,
            embedding=data["embedding"],
            word_fwd=block("word_fwd"),
            word_bwd=block("word_bwd"),
            word_attn=attn("word_attn"),
            sent_fwd=block("sent_fwd"),
            sent_bwd=block("sent_bwd"),
            sent_attn=attn("sent_attn"),
            w_out=data["w_out"],
            b_out=data["b_out"],
        )
