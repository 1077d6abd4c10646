"""Layout composer: encoder-decoder transformer over box-token sequences.

A word-level encoder reads the prompt; a causally-masked decoder reads the
box-token prefix and cross-attends to the encoded words.  Three heads hang
off each decoder step ``t_t``:

* a position head producing bivariate-mixture parameters for (x, y);
* a size head producing mixture parameters for (w, h), conditioned on
  ``[t_t; x; y]`` — the box's own position is concatenated in (teacher
  forcing supplies the ground-truth position, sampling the sampled one);
* a flag head with three logits (box / start / end).

Class labels come from a separate stacked-LSTM branch that consumes the
previous step's label embedding together with the mean-pooled encoder
output, and is trained with its own cross-entropy term.

Everything is built from the engine's primitive set; no fused layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..data.errors import DataError
from ..engine import Tensor, ops
from ..mixtures import MdnParams, RHO_GUARD, mdn_from_raw

__all__ = [
    "ComposerConfig", "MdnParams", "ComposerOutputs",
    "init_composer_params", "composer_forward", "size_head_params",
    "sinusoidal_positions", "RHO_GUARD",
]


@dataclass(frozen=True)
class ComposerConfig:
    """Architecture and training hyper-parameters for the layout composer."""

    text_vocab_size: int
    num_classes: int
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 128
    max_seq_len: int = 8
    max_text_len: int = 16
    n_mixtures: int = 5
    class_lstm_size: int = 64
    class_lstm_layers: int = 2
    lambda_xy: float = 1.0
    lambda_wh: float = 1.0
    lambda_p: float = 0.1
    lambda_class: float = 0.3
    learning_rate: float = 1e-3
    clip_norm: float = 1.0
    batch_size: int = 64
    train_steps: int = 2000

    def __post_init__(self):
        if self.n_mixtures < 1:
            raise ValueError("n_mixtures must be >= 1")
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ComposerConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass
class ComposerOutputs:
    mdn_xy: MdnParams
    mdn_wh: MdnParams
    flag_logits: Tensor   # (B, T, 3)
    class_logits: Tensor  # (B, T, C)
    class_probs: Tensor   # (B, T, C)
    decoder_out: Tensor   # (B, T, d_model)
    encoder_out: Tensor   # (B, Tt, d_model)
    pooled_text: Tensor   # (B, d_model)


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    """Classic fixed sin/cos position table, shape (length, dim)."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    div = np.exp(np.arange(0, dim, 2, dtype=np.float64) * (-np.log(10000.0) / dim))
    angles = positions * div  # (length, ceil(dim/2))
    table = np.zeros((length, dim), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)[:, : dim // 2]
    return table


def _normal(rng: np.random.Generator, shape, scale=0.02) -> np.ndarray:
    return rng.normal(0.0, scale, size=shape)


def init_composer_params(config: ComposerConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    d = config.d_model
    p: dict[str, np.ndarray] = {}

    p["enc.word_emb"] = _normal(rng, (config.text_vocab_size, d))
    for i in range(config.n_layers):
        for name in ("attn",):
            base = f"enc.l{i}.{name}"
            for w in ("wq", "wk", "wv", "wo"):
                p[f"{base}.{w}"] = _normal(rng, (d, d))
                p[f"{base}.{w}_b"] = np.zeros(d)
        p[f"enc.l{i}.ln1.g"] = np.ones(d)
        p[f"enc.l{i}.ln1.b"] = np.zeros(d)
        p[f"enc.l{i}.ln2.g"] = np.ones(d)
        p[f"enc.l{i}.ln2.b"] = np.zeros(d)
        p[f"enc.l{i}.ff.w1"] = _normal(rng, (d, config.d_ff))
        p[f"enc.l{i}.ff.b1"] = np.zeros(config.d_ff)
        p[f"enc.l{i}.ff.w2"] = _normal(rng, (config.d_ff, d))
        p[f"enc.l{i}.ff.b2"] = np.zeros(d)
    p["enc.ln_out.g"] = np.ones(d)
    p["enc.ln_out.b"] = np.zeros(d)

    p["dec.coord_proj"] = _normal(rng, (4, d))
    p["dec.coord_proj_b"] = np.zeros(d)
    p["dec.class_emb"] = _normal(rng, (config.num_classes + 1, d))  # + blank row
    p["dec.flag_emb"] = _normal(rng, (3, d))
    for i in range(config.n_layers):
        for name in ("self", "cross"):
            base = f"dec.l{i}.{name}"
            for w in ("wq", "wk", "wv", "wo"):
                p[f"{base}.{w}"] = _normal(rng, (d, d))
                p[f"{base}.{w}_b"] = np.zeros(d)
        for ln in ("ln1", "ln2", "ln3"):
            p[f"dec.l{i}.{ln}.g"] = np.ones(d)
            p[f"dec.l{i}.{ln}.b"] = np.zeros(d)
        p[f"dec.l{i}.ff.w1"] = _normal(rng, (d, config.d_ff))
        p[f"dec.l{i}.ff.b1"] = np.zeros(config.d_ff)
        p[f"dec.l{i}.ff.w2"] = _normal(rng, (config.d_ff, d))
        p[f"dec.l{i}.ff.b2"] = np.zeros(d)
    p["dec.ln_out.g"] = np.ones(d)
    p["dec.ln_out.b"] = np.zeros(d)

    m6 = 6 * config.n_mixtures
    p["head.xy.w"] = _normal(rng, (d, m6))
    p["head.xy.b"] = np.zeros(m6)
    p["head.wh.w"] = _normal(rng, (d + 2, m6))
    p["head.wh.b"] = np.zeros(m6)
    p["head.flag.w"] = _normal(rng, (d, 3))
    p["head.flag.b"] = np.zeros(3)

    hidden = config.class_lstm_size
    in_dim = 2 * d  # [previous-label embedding; pooled text encoding]
    for layer in range(config.class_lstm_layers):
        layer_in = in_dim if layer == 0 else hidden
        p[f"cls.l{layer}.wx"] = _normal(rng, (layer_in, 4 * hidden))
        p[f"cls.l{layer}.wh"] = _normal(rng, (hidden, 4 * hidden))
        bias = np.zeros(4 * hidden)
        bias[hidden: 2 * hidden] = 1.0  # forget-gate bias
        p[f"cls.l{layer}.b"] = bias
    p["cls.out.w"] = _normal(rng, (hidden, config.num_classes))
    p["cls.out.b"] = np.zeros(config.num_classes)

    return {name: Tensor(value, requires_grad=True, name=name)
            for name, value in p.items()}


def _layer_norm(p, prefix: str, x: Tensor) -> Tensor:
    return ops.layer_norm(x, p[f"{prefix}.g"], p[f"{prefix}.b"])


def _project(p, base: str, w: str, x: Tensor) -> Tensor:
    return ops.matmul(x, p[f"{base}.{w}"]) + p[f"{base}.{w}_b"]


def _split_heads(x: Tensor, n_heads: int) -> Tensor:
    b, t, d = x.shape
    parts = ops.reshape(x, (b, t, n_heads, d // n_heads))
    return ops.transpose(parts, (0, 2, 1, 3))  # (B, H, T, Dh)


def _merge_heads(x: Tensor) -> Tensor:
    b, h, t, dh = x.shape
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (b, t, h * dh))


def _attention_block(p, base: str, query_in: Tensor, kv_in: Tensor,
                     n_heads: int, mask: np.ndarray | None) -> Tensor:
    """Multi-head attention; ``mask`` is an additive numpy constant
    broadcastable (by trailing-suffix rule) to the (B, H, Tq, Tk) scores."""
    q = _split_heads(_project(p, base, "wq", query_in), n_heads)
    k = _split_heads(_project(p, base, "wk", kv_in), n_heads)
    v = _split_heads(_project(p, base, "wv", kv_in), n_heads)
    dh = q.shape[-1]
    scores = ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))) * ops.wrap(1.0 / np.sqrt(dh))
    if mask is not None:
        scores = scores + ops.constant(mask)
    weights = ops.softmax(scores, axis=-1)
    merged = _merge_heads(ops.matmul(weights, v))
    return _project(p, base, "wo", merged)


def _ffw(p, base: str, x: Tensor) -> Tensor:
    hidden = ops.tanh(ops.matmul(x, p[f"{base}.w1"]) + p[f"{base}.b1"])
    return ops.matmul(hidden, p[f"{base}.w2"]) + p[f"{base}.b2"]


def _encode_text(p, config: ComposerConfig, text_ids: np.ndarray,
                 text_mask: np.ndarray) -> tuple[Tensor, Tensor]:
    """Returns (encoder outputs (B, Tt, D), masked-mean pooled (B, D))."""
    b, tt = text_ids.shape
    x = ops.embedding(p["enc.word_emb"], text_ids)
    x = x + ops.constant(sinusoidal_positions(tt, config.d_model))
    # Additive attention mask hiding padded words from every query.
    pad = np.where(text_mask[:, None, None, :] > 0.5, 0.0, -1e9)
    pad = np.broadcast_to(pad, (b, config.n_heads, tt, tt)).copy()
    for i in range(config.n_layers):
        base = f"enc.l{i}"
        x = x + _attention_block(p, f"{base}.attn", _layer_norm(p, f"{base}.ln1", x),
                                 _layer_norm(p, f"{base}.ln1", x), config.n_heads, pad)
        x = x + _ffw(p, f"{base}.ff", _layer_norm(p, f"{base}.ln2", x))
    out = _layer_norm(p, "enc.ln_out", x)
    # Masked mean over words.
    mask_tiled = ops.constant(np.repeat(text_mask[:, :, None], config.d_model, axis=2))
    counts = text_mask.sum(axis=1, keepdims=True)  # (B, 1)
    counts = np.maximum(counts, 1.0)
    inv = ops.constant(np.repeat(1.0 / counts, config.d_model, axis=1))  # (B, D)
    pooled = ops.sum_(out * mask_tiled, axis=1) * inv
    return out, pooled


def _embed_boxes(p, config: ComposerConfig, coords: np.ndarray,
                 labels: np.ndarray, flags: np.ndarray) -> Tensor:
    b, t, _ = coords.shape
    geom = ops.matmul(ops.constant(coords), p["dec.coord_proj"]) + p["dec.coord_proj_b"]
    cls = ops.embedding(p["dec.class_emb"], labels)
    flg = ops.embedding(p["dec.flag_emb"], flags)
    x = geom + cls + flg
    return x + ops.constant(sinusoidal_positions(t, config.d_model))


def _causal_mask(t: int) -> np.ndarray:
    mask = np.triu(np.full((t, t), -1e9), k=1)
    return mask  # (Tq, Tk): suffix-broadcasts over (B, H)


def _cross_mask(text_mask: np.ndarray, n_heads: int, tq: int) -> np.ndarray:
    b, tk = text_mask.shape
    pad = np.where(text_mask[:, None, None, :] > 0.5, 0.0, -1e9)
    return np.broadcast_to(pad, (b, n_heads, tq, tk)).copy()


def _decode_boxes(p, config: ComposerConfig, box_emb: Tensor, enc_out: Tensor,
                  text_mask: np.ndarray) -> Tensor:
    b, t, _ = box_emb.shape
    causal = _causal_mask(t)
    cross = _cross_mask(text_mask, config.n_heads, t)
    x = box_emb
    for i in range(config.n_layers):
        base = f"dec.l{i}"
        normed = _layer_norm(p, f"{base}.ln1", x)
        x = x + _attention_block(p, f"{base}.self", normed, normed,
                                 config.n_heads, causal)
        x = x + _attention_block(p, f"{base}.cross",
                                 _layer_norm(p, f"{base}.ln2", x), enc_out,
                                 config.n_heads, cross)
        x = x + _ffw(p, f"{base}.ff", _layer_norm(p, f"{base}.ln3", x))
    return _layer_norm(p, "dec.ln_out", x)


def size_head_params(p, config: ComposerConfig, decoder_out: Tensor,
                     position_xy: np.ndarray) -> MdnParams:
    """Size mixture conditioned on [t_t; x; y] (position is a constant input)."""
    joined = ops.concat([decoder_out, ops.constant(position_xy)], axis=-1)
    raw = ops.matmul(joined, p["head.wh.w"]) + p["head.wh.b"]
    return mdn_from_raw(raw, config.n_mixtures)


def _class_branch(p, config: ComposerConfig, labels: np.ndarray,
                  pooled: Tensor) -> tuple[Tensor, Tensor]:
    """Stacked LSTM over steps; input = [label embedding; pooled text]."""
    b, t = labels.shape
    hidden = config.class_lstm_size
    h = [ops.constant(np.zeros((b, hidden))) for _ in range(config.class_lstm_layers)]
    c = [ops.constant(np.zeros((b, hidden))) for _ in range(config.class_lstm_layers)]
    step_logits = []
    for step in range(t):
        emb = ops.embedding(p["dec.class_emb"], labels[:, step])  # (B, D)
        x = ops.concat([emb, pooled], axis=-1)
        for layer in range(config.class_lstm_layers):
            base = f"cls.l{layer}"
            gates = (ops.matmul(x, p[f"{base}.wx"]) +
                     ops.matmul(h[layer], p[f"{base}.wh"]) + p[f"{base}.b"])
            i_g = ops.sigmoid(ops.slice_axis(gates, -1, 0, hidden))
            f_g = ops.sigmoid(ops.slice_axis(gates, -1, hidden, 2 * hidden))
            g_g = ops.tanh(ops.slice_axis(gates, -1, 2 * hidden, 3 * hidden))
            o_g = ops.sigmoid(ops.slice_axis(gates, -1, 3 * hidden, 4 * hidden))
            c[layer] = f_g * c[layer] + i_g * g_g
            h[layer] = o_g * ops.tanh(c[layer])
            x = h[layer]
        logits = ops.matmul(x, p["cls.out.w"]) + p["cls.out.b"]  # (B, C)
        step_logits.append(ops.reshape(logits, (b, 1, config.num_classes)))
    class_logits = ops.concat(step_logits, axis=1)  # (B, T, C)
    return class_logits, ops.softmax(class_logits, axis=-1)


def composer_forward(
    params: dict[str, Tensor],
    config: ComposerConfig,
    text_ids: np.ndarray,     # (B, Tt) int
    text_mask: np.ndarray,    # (B, Tt) float 1/0
    coords: np.ndarray,       # (B, T, 4) teacher-forced inputs
    labels: np.ndarray,       # (B, T) int
    flags: np.ndarray,        # (B, T) int
    target_xy: np.ndarray,    # (B, T, 2) next-step positions for the size head
) -> ComposerOutputs:
    if coords.shape[1] > config.max_seq_len:
        raise DataError(f"box sequence length {coords.shape[1]} exceeds "
                        f"max_seq_len {config.max_seq_len}")
    if text_ids.shape[1] > config.max_text_len:
        raise DataError(f"text length {text_ids.shape[1]} exceeds "
                        f"max_text_len {config.max_text_len}")
    enc_out, pooled = _encode_text(params, config, text_ids, text_mask)
    box_emb = _embed_boxes(params, config, coords, labels, flags)
    dec_out = _decode_boxes(params, config, box_emb, enc_out, text_mask)

    raw_xy = ops.matmul(dec_out, params["head.xy.w"]) + params["head.xy.b"]
    mdn_xy = mdn_from_raw(raw_xy, config.n_mixtures)
    mdn_wh = size_head_params(params, config, dec_out, target_xy)
    flag_logits = ops.matmul(dec_out, params["head.flag.w"]) + params["head.flag.b"]
    class_logits, class_probs = _class_branch(params, config, labels, pooled)

    return ComposerOutputs(
        mdn_xy=mdn_xy, mdn_wh=mdn_wh, flag_logits=flag_logits,
        class_logits=class_logits, class_probs=class_probs,
        decoder_out=dec_out, encoder_out=enc_out, pooled_text=pooled,
    )
