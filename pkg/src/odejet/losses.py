"""Task losses: mean squared error and softmax cross-entropy."""

from __future__ import annotations

import numpy as np

from . import ops
from .errors import ShapeError


def mse(pred, target) -> object:
    """Mean over all elements of the squared difference."""
    target = ops.as_tensor(target)
    if ops.shape_of(pred) != target.shape:
        raise ShapeError("mse", ops.shape_of(pred), target.shape)
    d = ops.sub(pred, target)
    return ops.sdiv(ops.sum_all(ops.square(d)), target.size)


def cross_entropy(logits, labels) -> object:
    """Mean softmax cross-entropy of (B, C) logits against integer labels.

    The row-max shift for numerical stability is taken from the logit
    values and treated as a constant, which leaves gradients unchanged.
    """
    labels = np.asarray(labels)
    b, c = ops.shape_of(logits)
    if labels.shape != (b,):
        raise ShapeError("cross_entropy", (b, c), labels.shape)
    if labels.min() < 0 or labels.max() >= c:
        raise ShapeError("cross_entropy(label range)", (b, c), labels.shape)
    lp = np.asarray(ops.peek(logits), dtype=float)
    m = lp.max(axis=1, keepdims=True)
    e = ops.exp(ops.sub(logits, np.repeat(m, c, axis=1)))
    lse = ops.add(ops.log(ops.rowsum(e)), m)
    onehot = np.zeros((b, c))
    onehot[np.arange(b), labels] = 1.0
    picked = ops.rowsum(ops.mul(logits, onehot))
    return ops.sdiv(ops.sum_all(ops.sub(lse, picked)), b)
