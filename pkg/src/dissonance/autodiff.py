"""Reverse-mode automatic differentiation over float64 numpy arrays.

Small tape-based engine: a Tensor wraps an ndarray, ops build closures that
scatter gradients back to their parents, backward() walks the graph in
reverse topological order. Everything is float64; graphs are only recorded
when an input requires grad, so inference passes pay no tape cost.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def accumulate(self, g: np.ndarray):
        self.grad = g if self.grad is None else self.grad + g

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward_fn is not None:
                node._backward_fn(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward_fn = backward_fn
    return out


# ---- elementwise ----

def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data + b.data

    def bw(g):
        if a.requires_grad:
            a.accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g, b.data.shape))

    return _make(out_data, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data - b.data

    def bw(g):
        if a.requires_grad:
            a.accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(-g, b.data.shape))

    return _make(out_data, (a, b), bw)


def neg(a) -> Tensor:
    a = _wrap(a)

    def bw(g):
        if a.requires_grad:
            a.accumulate(-g)

    return _make(-a.data, (a,), bw)


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data * b.data

    def bw(g):
        if a.requires_grad:
            a.accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _make(out_data, (a, b), bw)


def div(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    out_data = a.data / b.data

    def bw(g):
        if a.requires_grad:
            a.accumulate(_unbroadcast(g / b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(out_data, (a, b), bw)


def pow_const(a, p: float) -> Tensor:
    a = _wrap(a)
    out_data = a.data ** p

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * p * a.data ** (p - 1.0))

    return _make(out_data, (a,), bw)


def exp(a) -> Tensor:
    a = _wrap(a)
    out_data = np.exp(a.data)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * out_data)

    return _make(out_data, (a,), bw)


def log(a) -> Tensor:
    a = _wrap(a)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g / a.data)

    return _make(np.log(a.data), (a,), bw)


def tanh(a) -> Tensor:
    a = _wrap(a)
    out_data = np.tanh(a.data)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), bw)


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    out_data = 1.0 / (1.0 + np.exp(-np.abs(a.data)))
    out_data = np.where(a.data >= 0, out_data, 1.0 - out_data)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * out_data * (1.0 - out_data))

    return _make(out_data, (a,), bw)


def relu(a) -> Tensor:
    a = _wrap(a)
    out_data = np.maximum(a.data, 0.0)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * (a.data > 0))

    return _make(out_data, (a,), bw)


def gelu(a) -> Tensor:
    """Gaussian error linear unit, exact erf form."""
    a = _wrap(a)
    phi = 0.5 * (1.0 + erf(a.data * _INV_SQRT2))
    out_data = a.data * phi

    def bw(g):
        if a.requires_grad:
            dens = _INV_SQRT2PI * np.exp(-0.5 * a.data * a.data)
            a.accumulate(g * (phi + a.data * dens))

    return _make(out_data, (a,), bw)


def softplus(a) -> Tensor:
    a = _wrap(a)
    out_data = np.logaddexp(0.0, a.data)

    def bw(g):
        if a.requires_grad:
            s = 1.0 / (1.0 + np.exp(-np.abs(a.data)))
            s = np.where(a.data >= 0, s, 1.0 - s)
            a.accumulate(g * s)

    return _make(out_data, (a,), bw)


# ---- shape ----

def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    old = a.data.shape

    def bw(g):
        if a.requires_grad:
            a.accumulate(g.reshape(old))

    return _make(a.data.reshape(shape), (a,), bw)


def transpose(a, axes) -> Tensor:
    a = _wrap(a)
    inv = np.argsort(axes)

    def bw(g):
        if a.requires_grad:
            a.accumulate(np.transpose(g, inv))

    return _make(np.transpose(a.data, axes), (a,), bw)


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = _wrap(a)

    def bw(g):
        if a.requires_grad:
            a.accumulate(np.swapaxes(g, ax1, ax2))

    return _make(np.swapaxes(a.data, ax1, ax2), (a,), bw)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        pieces = np.split(g, splits, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                t.accumulate(piece)

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), bw)


def getitem(a, idx) -> Tensor:
    a = _wrap(a)

    def bw(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            np.add.at(full, idx, g)
            a.accumulate(full)

    return _make(a.data[idx], (a,), bw)


# ---- reductions ----

def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        if not a.requires_grad:
            return
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.data.shape).copy())
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a.accumulate(np.broadcast_to(g, a.data.shape).copy())

    return _make(out_data, (a,), bw)


def tmean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


# ---- matmul ----

def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim == 1:
        return reshape(matmul(reshape(a, (1, -1)), b), (b.data.shape[-1],))
    if b.data.ndim == 1:
        return reshape(matmul(a, reshape(b, (-1, 1))), a.data.shape[:-1])
    out_data = a.data @ b.data

    def bw(g):
        if a.requires_grad:
            a.accumulate(_unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.data.shape))
        if b.requires_grad:
            b.accumulate(_unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.data.shape))

    return _make(out_data, (a, b), bw)


# ---- normalizations ----

def softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        if a.requires_grad:
            dot = (g * out_data).sum(axis=axis, keepdims=True)
            a.accumulate(out_data * (g - dot))

    return _make(out_data, (a,), bw)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out_data = shifted - lse

    def bw(g):
        if a.requires_grad:
            sm = np.exp(out_data)
            a.accumulate(g - sm * g.sum(axis=axis, keepdims=True))

    return _make(out_data, (a,), bw)


def l2_normalize(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    norms = np.sqrt((a.data * a.data).sum(axis=axis, keepdims=True))
    if np.any(norms < 1e-12):
        raise ValueError("l2_normalize: input row with near-zero norm")
    sq = tsum(mul(a, a), axis=axis, keepdims=True)
    return mul(a, pow_const(sq, -0.5))


def cosine_similarity(u, v, axis: int = -1) -> Tensor:
    """Row-wise cosine, clipped to [-1, 1]; rows where either norm < 1e-12 give 0."""
    u, v = _wrap(u), _wrap(v)
    nu = np.sqrt((u.data * u.data).sum(axis=axis))
    nv = np.sqrt((v.data * v.data).sum(axis=axis))
    dotv = (u.data * v.data).sum(axis=axis)
    ok = (nu >= 1e-12) & (nv >= 1e-12)
    denom = np.where(ok, nu * nv, 1.0)
    raw = dotv / denom
    out_data = np.where(ok, np.clip(raw, -1.0, 1.0), 0.0)

    def bw(g):
        # grad only where defined and strictly inside the clip interval
        live = ok & (np.abs(raw) < 1.0)
        gl = g * live
        if u.requires_grad or v.requires_grad:
            c = np.expand_dims(out_data, axis)
            gl_e = np.expand_dims(gl, axis)
            nu_e = np.expand_dims(np.where(nu < 1e-12, 1.0, nu), axis)
            nv_e = np.expand_dims(np.where(nv < 1e-12, 1.0, nv), axis)
            if u.requires_grad:
                u.accumulate(gl_e * (v.data / (nu_e * nv_e) - c * u.data / (nu_e * nu_e)))
            if v.requires_grad:
                v.accumulate(gl_e * (u.data / (nu_e * nv_e) - c * v.data / (nv_e * nv_e)))

    return _make(out_data, (u, v), bw)


# ---- structural ----

def stop_gradient(a) -> Tensor:
    """Forward identity; the tape is cut here."""
    a = _wrap(a)
    return Tensor(a.data)


def dropout(a, p: float, rng: np.random.Generator, training: bool) -> Tensor:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    a = _wrap(a)
    if not training or p == 0.0:
        return a
    mask = (rng.random(a.data.shape) >= p) / (1.0 - p)

    def bw(g):
        if a.requires_grad:
            a.accumulate(g * mask)

    return _make(a.data * mask, (a,), bw)


# ---- losses ----

def cross_entropy(logits: Tensor, labels, num_classes: int | None = None,
                  smoothing: float = 0.0) -> Tensor:
    """Mean label-smoothed cross entropy. Target puts 1-eps+eps/C on the true
    class and eps/C elsewhere."""
    labels = np.asarray(labels)
    if logits.data.ndim != 2:
        raise ValueError("cross_entropy expects (batch, classes) logits")
    n, c = logits.data.shape
    if labels.shape != (n,):
        raise ValueError("labels must be shape (batch,)")
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError("label out of range")
    if not 0.0 <= smoothing < 1.0:
        raise ValueError("smoothing must be in [0, 1)")
    target = np.full((n, c), smoothing / c)
    target[np.arange(n), labels] += 1.0 - smoothing
    lp = log_softmax(logits, axis=-1)
    return mul(tsum(mul(lp, target)), -1.0 / n)


def bce_with_logits(logits: Tensor, targets) -> Tensor:
    """Mean binary cross entropy on raw logits."""
    targets = _as_array(targets)
    n = max(logits.data.size, 1)
    per = sub(softplus(logits), mul(logits, targets))
    return mul(tsum(per), 1.0 / n)


# ---- optimizer ----

class AdamW:
    """Adam with decoupled weight decay and bias correction."""

    def __init__(self, params, lr: float = 5e-4, betas=(0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 0.0):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                p.data -= self.lr * self.weight_decay * p.data
            p.data -= self.lr * update


def clip_grad_norm(params, max_norm: float) -> float:
    """Scale gradients so their global L2 norm is at most max_norm.
    Returns the pre-clip norm."""
    total = 0.0
    grads = []
    for p in params:
        if p.grad is not None:
            grads.append(p.grad)
            total += float((p.grad * p.grad).sum())
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


# ---- gradient verification ----

def finite_difference_check(build_loss, params, rng: np.random.Generator,
                            probes_per_param: int = 20, step: float = 1e-5,
                            rtol: float = 1e-4) -> float:
    """Compare analytic gradients against central finite differences.

    build_loss must reconstruct the loss graph from scratch on every call
    (any internal randomness must be re-seeded inside it). Returns the worst
    relative error seen; raises AssertionError past rtol.
    """
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = [p.grad.copy() for p in params]
    worst = 0.0
    for pi, p in enumerate(params):
        flat = p.data.reshape(-1)
        n = flat.size
        k = min(probes_per_param, n)
        idxs = rng.choice(n, size=k, replace=False)
        for idx in idxs:
            orig = flat[idx]
            flat[idx] = orig + step
            f_plus = build_loss().item()
            flat[idx] = orig - step
            f_minus = build_loss().item()
            flat[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = analytic[pi].reshape(-1)[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, rel)
            if rel >= rtol:
                raise AssertionError(
                    f"finite-difference mismatch at param {pi} index {idx}: "
                    f"analytic {a:.10g} vs numeric {numeric:.10g} (rel {rel:.3g})")
    return worst
