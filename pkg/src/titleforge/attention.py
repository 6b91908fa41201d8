"""Reference attention ops: numeric oracles for the backend adapter, not a training path."""

from __future__ import annotations

import numpy as np


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=1, keepdims=True)


def attention_reference(q, k, v) -> np.ndarray:
    """Scaled dot-product attention: softmax(QK^T / sqrt(d_k)) V."""
    q, k, v = (np.asarray(m, dtype=np.float64) for m in (q, k, v))
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ValueError("attention expects 2-d matrices")
    if q.shape[1] != k.shape[1]:
        raise ValueError(f"query/key width mismatch: {q.shape[1]} vs {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise ValueError(f"key/value count mismatch: {k.shape[0]} vs {v.shape[0]}")
    if not (np.isfinite(q).all() and np.isfinite(k).all() and np.isfinite(v).all()):
        raise ValueError("attention inputs must be finite")
    d_k = q.shape[1]
    if d_k <= 0:
        raise ValueError("d_k must be positive")
    return _softmax_rows(q @ k.T / np.sqrt(d_k)) @ v


def multi_head_reference(q, k, v, projections, w_o) -> np.ndarray:
    """Concat(head_1..head_h) W_O with head_i = attention(Q W_i^Q, K W_i^K, V W_i^V)."""
    q, k, v = (np.asarray(m, dtype=np.float64) for m in (q, k, v))
    if not projections:
        raise ValueError("at least one projection triple required")
    heads = []
    for w_q, w_k, w_v in projections:
        w_q, w_k, w_v = (np.asarray(m, dtype=np.float64) for m in (w_q, w_k, w_v))
        if w_q.shape[0] != q.shape[1] or w_k.shape[0] != k.shape[1] or w_v.shape[0] != v.shape[1]:
            raise ValueError("projection rows must match input width")
        if w_q.shape[1] != w_k.shape[1]:
            raise ValueError("query/key projections must share output width")
        heads.append(attention_reference(q @ w_q, k @ w_k, v @ w_v))
    concat = np.concatenate(heads, axis=1)
    w_o = np.asarray(w_o, dtype=np.float64)
    if w_o.shape[0] != concat.shape[1]:
        raise ValueError(f"output projection rows {w_o.shape[0]} != concat width {concat.shape[1]}")
    return concat @ w_o
