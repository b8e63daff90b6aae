"""Minimal reverse-mode automatic differentiation over numpy arrays.

Values are stored as 32-bit floats by default (64-bit graphs are supported by
simply feeding float64 arrays in, which the gradient-check tests use).
Reductions accumulate in 64 bits regardless of storage dtype.  Everything is
deterministic: the same graph built from the same inputs produces bit-identical
forward values and gradients, and repeated ``backward`` calls from the same
root re-derive the same gradients from scratch.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

DEFAULT_DTYPE = np.float32

_grad_enabled = True


class ZeroNormWarning(RuntimeWarning):
    """Cosine similarity saw a zero-norm operand (degenerate residual)."""


class no_grad:
    """Context manager that skips building backward closures (inference)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class DiffNode:
    """A value in the computation graph with a gradient slot.

    ``value`` and (after ``backward``) ``grad`` are numpy arrays of the same
    shape.  ``op`` records how the node was produced, which the trainer's
    structural ablation checks inspect.
    """

    __slots__ = ("value", "grad", "op", "parents", "requires_grad", "_backward")

    def __init__(self, value, op="leaf", parents=(), requires_grad=False, backward=None):
        self.value = value
        self.grad = None
        self.op = op
        self.parents = parents
        self.requires_grad = requires_grad
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    @property
    def dtype(self):
        return self.value.dtype

    def __repr__(self):
        return f"DiffNode(op={self.op!r}, shape={self.value.shape}, requires_grad={self.requires_grad})"

    # Operator sugar; binary ops broadcast like numpy (the strict equal-shape
    # contract lives in the module-level add/sub/mul functions).
    def __add__(self, other):
        return _badd(self, as_node(other, self.dtype))

    def __radd__(self, other):
        return _badd(as_node(other, self.dtype), self)

    def __sub__(self, other):
        return _bsub(self, as_node(other, self.dtype))

    def __rsub__(self, other):
        return _bsub(as_node(other, self.dtype), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return _bmul(self, as_node(other, self.dtype))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def mean(self):
        return reduce_mean(self)

    def sum(self):
        return reduce_sum(self)


def constant(value, dtype=None):
    """Wrap an array as a graph constant (never receives a gradient)."""
    arr = np.asarray(value, dtype=dtype if dtype is not None else None)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(DEFAULT_DTYPE)
    return DiffNode(arr, op="const")


def parameter(value, dtype=None):
    """Wrap an array as a trainable leaf."""
    arr = np.array(value, dtype=dtype if dtype is not None else None)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(DEFAULT_DTYPE)
    return DiffNode(arr, op="param", requires_grad=True)


def as_node(x, dtype=None):
    if isinstance(x, DiffNode):
        return x
    return constant(x, dtype=dtype or DEFAULT_DTYPE)


def _make(value, op, parents, backward):
    req = _grad_enabled and any(p.requires_grad for p in parents)
    if not req:
        return DiffNode(value, op=op)
    return DiffNode(value, op=op, parents=parents, requires_grad=True, backward=backward)


def _accum(node, g):
    # Non-inplace accumulation: contributions may alias upstream grads.
    if node.requires_grad:
        node.grad = g if node.grad is None else node.grad + g


def _unbroadcast(g, shape):
    """Sum gradient ``g`` down to ``shape`` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise ops
# ---------------------------------------------------------------------------

def _check_same_shape(a, b, op):
    if a.value.shape != b.value.shape:
        raise ValueError(f"{op}: operand shapes differ: {a.value.shape} vs {b.value.shape}")


def _badd(a, b):
    out = _make(a.value + b.value, "add", (a, b), None)
    if out.requires_grad:
        def backward(g):
            _accum(a, _unbroadcast(g, a.value.shape))
            _accum(b, _unbroadcast(g, b.value.shape))
        out._backward = backward
    return out


def _bsub(a, b):
    out = _make(a.value - b.value, "sub", (a, b), None)
    if out.requires_grad:
        def backward(g):
            _accum(a, _unbroadcast(g, a.value.shape))
            _accum(b, _unbroadcast(-g, b.value.shape))
        out._backward = backward
    return out


def _bmul(a, b):
    out = _make(a.value * b.value, "mul", (a, b), None)
    if out.requires_grad:
        def backward(g):
            _accum(a, _unbroadcast(g * b.value, a.value.shape))
            _accum(b, _unbroadcast(g * a.value, b.value.shape))
        out._backward = backward
    return out


def add(a, b):
    """Elementwise sum; operands must have identical shapes."""
    a, b = as_node(a), as_node(b)
    _check_same_shape(a, b, "add")
    return _badd(a, b)


def sub(a, b):
    """Elementwise difference; operands must have identical shapes."""
    a, b = as_node(a), as_node(b)
    _check_same_shape(a, b, "sub")
    return _bsub(a, b)


def mul(a, b):
    """Elementwise product; operands must have identical shapes."""
    a, b = as_node(a), as_node(b)
    _check_same_shape(a, b, "mul")
    return _bmul(a, b)


def scale(x, c):
    """Multiply by a python scalar."""
    x = as_node(x)
    c = float(c)
    out = _make(x.value * c, "scale", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g * c)
    return out


def affine(x, a, b):
    """a * x + b with scalar a, b."""
    x = as_node(x)
    a, b = float(a), float(b)
    out = _make(x.value * a + b, "affine", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g * a)
    return out


def relu(x):
    x = as_node(x)
    out = _make(np.maximum(x.value, 0), "relu", (x,), None)
    if out.requires_grad:
        mask = x.value > 0
        out._backward = lambda g: _accum(x, g * mask)
    return out


def sigmoid(x):
    x = as_node(x)
    v = x.value
    s = np.empty_like(v)
    pos = v >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    s[~pos] = ev / (1.0 + ev)
    out = _make(s, "sigmoid", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g * (s * (1.0 - s)))
    return out


def tanh(x):
    x = as_node(x)
    t = np.tanh(x.value)
    out = _make(t, "tanh", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g * (1.0 - t * t))
    return out


def clamp01(x, straight_through=True):
    """Clamp to [0, 1].

    With ``straight_through=True`` (the training default) the gradient passes
    through unchanged everywhere; with ``False`` saturated entries get zero
    gradient and the open interval passes through.
    """
    x = as_node(x)
    out = _make(np.clip(x.value, 0.0, 1.0), "clamp01", (x,), None)
    if out.requires_grad:
        if straight_through:
            out._backward = lambda g: _accum(x, g)
        else:
            mask = (x.value > 0.0) & (x.value < 1.0)
            out._backward = lambda g: _accum(x, g * mask)
    return out


def softplus(x):
    """log(1 + exp(x)) with log-sum-exp stabilization."""
    x = as_node(x)
    v = x.value
    out_v = np.maximum(v, 0) + np.log1p(np.exp(-np.abs(v)))
    out = _make(out_v, "softplus", (x,), None)
    if out.requires_grad:
        pos = v >= 0
        sig = np.empty_like(v)
        sig[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
        ev = np.exp(v[~pos])
        sig[~pos] = ev / (1.0 + ev)
        out._backward = lambda g: _accum(x, g * sig)
    return out


def round_ste(x):
    """Round to nearest integer; identity (straight-through) gradient."""
    x = as_node(x)
    out = _make(np.rint(x.value), "round_ste", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g)
    return out


def stop_gradient(x):
    x = as_node(x)
    return DiffNode(x.value, op="stop_gradient")


# ---------------------------------------------------------------------------
# shape / indexing ops
# ---------------------------------------------------------------------------

def reshape(x, shape):
    x = as_node(x)
    old = x.value.shape
    out = _make(x.value.reshape(shape), "reshape", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, g.reshape(old))
    return out


def transpose(x, axes):
    x = as_node(x)
    axes = tuple(axes)
    out = _make(x.value.transpose(axes), "transpose", (x,), None)
    if out.requires_grad:
        inv = tuple(np.argsort(axes))
        out._backward = lambda g: _accum(x, g.transpose(inv))
    return out


def concat(nodes, axis):
    nodes = [as_node(n) for n in nodes]
    vals = [n.value for n in nodes]
    out = _make(np.concatenate(vals, axis=axis), "concat", tuple(nodes), None)
    if out.requires_grad:
        sizes = [v.shape[axis] for v in vals]
        splits = np.cumsum(sizes)[:-1]

        def backward(g):
            for n, piece in zip(nodes, np.split(g, splits, axis=axis)):
                _accum(n, piece)
        out._backward = backward
    return out


def take0(x, indices):
    """Select rows along axis 0 (gather); scatter-add on backward."""
    x = as_node(x)
    idx = np.asarray(indices, dtype=np.intp)
    out = _make(x.value[idx], "take0", (x,), None)
    if out.requires_grad:
        shape = x.value.shape

        def backward(g):
            gx = np.zeros(shape, dtype=g.dtype)
            np.add.at(gx, idx, g)
            _accum(x, gx)
        out._backward = backward
    return out


def pad_edge_hw(x, pad_h, pad_w):
    """Replicate-pad the bottom/right of the H and W axes of (..., H, W, C)."""
    x = as_node(x)
    if pad_h == 0 and pad_w == 0:
        return x
    nd = x.value.ndim
    pads = [(0, 0)] * nd
    pads[-3] = (0, pad_h)
    pads[-2] = (0, pad_w)
    out = _make(np.pad(x.value, pads, mode="edge"), "pad_edge", (x,), None)
    if out.requires_grad:
        h = x.value.shape[-3]
        w = x.value.shape[-2]

        def backward(g):
            g = np.array(g)
            if pad_w:
                g[..., :, w - 1, :] += g[..., :, w:, :].sum(axis=-2)
                g = g[..., :, :w, :]
            if pad_h:
                g[..., h - 1, :, :] += g[..., h:, :, :].sum(axis=-3)
                g = g[..., :h, :, :]
            _accum(x, g)
        out._backward = backward
    return out


def crop_hw(x, height, width):
    """Keep the top-left height x width window of the H, W axes."""
    x = as_node(x)
    out = _make(np.ascontiguousarray(x.value[..., :height, :width, :]), "crop_hw", (x,), None)
    if out.requires_grad:
        shape = x.value.shape

        def backward(g):
            gx = np.zeros(shape, dtype=g.dtype)
            gx[..., :height, :width, :] = g
            _accum(x, gx)
        out._backward = backward
    return out


# ---------------------------------------------------------------------------
# linear algebra / convolution
# ---------------------------------------------------------------------------

def matmul(a, b):
    """numpy-style matmul with broadcast batch dims."""
    a, b = as_node(a), as_node(b)
    out = _make(a.value @ b.value, "matmul", (a, b), None)
    if out.requires_grad:
        av, bv = a.value, b.value

        def backward(g):
            ga = g @ np.swapaxes(bv, -1, -2)
            gb = np.swapaxes(av, -1, -2) @ g
            _accum(a, _unbroadcast(ga, av.shape))
            _accum(b, _unbroadcast(gb, bv.shape))
        out._backward = backward
    return out


def apply_matrix(x, mat, axis):
    """Contract a fixed matrix against one axis of x: out[i] = sum_j mat[i, j] x[j]."""
    x = as_node(x)
    mat = np.asarray(mat, dtype=x.dtype)
    xm = np.moveaxis(x.value, axis, -1)
    ym = xm @ mat.T
    out = _make(np.moveaxis(ym, -1, axis), "apply_matrix", (x,), None)
    if out.requires_grad:
        def backward(g):
            gm = np.moveaxis(g, axis, -1)
            _accum(x, np.moveaxis(gm @ mat, -1, axis))
        out._backward = backward
    return out


def conv2d(x, weight, bias):
    """2-D cross-correlation with stride 1 and zero padding (k-1)/2.

    x: (H, W, Cin) or (N, H, W, Cin); weight: (k, k, Cin, Cout); bias: (Cout,).
    Output spatial size equals input.
    """
    x, weight, bias = as_node(x), as_node(weight), as_node(bias)
    xv, wv, bv = x.value, weight.value, bias.value
    if wv.ndim != 4 or wv.shape[0] != wv.shape[1]:
        raise ValueError(f"conv2d: kernel must be (k, k, Cin, Cout), got {wv.shape}")
    k = wv.shape[0]
    if k % 2 != 1:
        raise ValueError(f"conv2d: kernel size must be odd, got {k}")
    single = xv.ndim == 3
    x4 = xv[None] if single else xv
    if x4.ndim != 4 or x4.shape[3] != wv.shape[2]:
        raise ValueError(f"conv2d: input shape {xv.shape} incompatible with kernel shape {wv.shape}")
    if bv.shape != (wv.shape[3],):
        raise ValueError(f"conv2d: bias shape {bv.shape} incompatible with kernel shape {wv.shape}")

    n, h, w, ci = x4.shape
    co = wv.shape[3]
    p = (k - 1) // 2
    xp = np.pad(x4, ((0, 0), (p, p), (p, p), (0, 0)))
    cols = sliding_window_view(xp, (k, k), axis=(1, 2))  # (n, h, w, ci, k, k)
    cols2 = cols.reshape(n * h * w, ci * k * k)
    wmat = wv.transpose(2, 0, 1, 3).reshape(ci * k * k, co)
    y = cols2 @ wmat + bv
    y = y.reshape(n, h, w, co)
    out = _make(y[0] if single else y, "conv2d", (x, weight, bias), None)
    if out.requires_grad:
        def backward(g):
            g4 = g[None] if single else g
            g2 = g4.reshape(n * h * w, co)
            if weight.requires_grad:
                gw = (cols2.T @ g2).reshape(ci, k, k, co).transpose(1, 2, 0, 3)
                _accum(weight, gw)
            if bias.requires_grad:
                _accum(bias, g2.sum(axis=0))
            if x.requires_grad:
                gcols = (g2 @ wmat.T).reshape(n, h, w, ci, k, k)
                gxp = np.zeros_like(xp)
                for i in range(k):
                    for j in range(k):
                        gxp[:, i:i + h, j:j + w, :] += gcols[:, :, :, :, i, j]
                gx = gxp[:, p:p + h, p:p + w, :]
                _accum(x, gx[0] if single else gx)
        out._backward = backward
    return out


def avg_pool2(x):
    """2x2 average pooling over the H, W axes of (..., H, W, C)."""
    x = as_node(x)
    v = x.value
    h, w = v.shape[-3], v.shape[-2]
    if h % 2 or w % 2:
        raise ValueError(f"avg_pool2: H and W must be even, got {v.shape}")
    lead = v.shape[:-3]
    r = v.reshape(lead + (h // 2, 2, w // 2, 2, v.shape[-1]))
    y = r.mean(axis=(-4, -2), dtype=v.dtype)
    out = _make(y, "avg_pool2", (x,), None)
    if out.requires_grad:
        def backward(g):
            gq = (g * np.asarray(0.25, dtype=g.dtype))[..., :, None, :, None, :]
            gx = np.broadcast_to(gq, lead + (h // 2, 2, w // 2, 2, v.shape[-1]))
            _accum(x, gx.reshape(v.shape))
        out._backward = backward
    return out


# ---------------------------------------------------------------------------
# reductions (64-bit accumulation)
# ---------------------------------------------------------------------------

def reduce_mean(x):
    x = as_node(x)
    n = x.value.size
    val = np.asarray(np.mean(x.value, dtype=np.float64), dtype=x.dtype)
    out = _make(val, "mean", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, np.full(x.value.shape, g / n, dtype=x.dtype))
    return out


def reduce_sum(x):
    x = as_node(x)
    val = np.asarray(np.sum(x.value, dtype=np.float64), dtype=x.dtype)
    out = _make(val, "sum", (x,), None)
    if out.requires_grad:
        out._backward = lambda g: _accum(x, np.full(x.value.shape, g, dtype=x.dtype))
    return out


def mse(a, b):
    """Mean squared error over all elements."""
    a, b = as_node(a), as_node(b)
    _check_same_shape(a, b, "mse")
    d = a.value - b.value
    val = np.asarray(np.mean(np.square(d, dtype=np.float64)), dtype=a.dtype)
    out = _make(val, "mse", (a, b), None)
    if out.requires_grad:
        c = 2.0 / d.size

        def backward(g):
            ga = (g * c) * d
            _accum(a, ga)
            _accum(b, -ga)
        out._backward = backward
    return out


def cosine_similarity(a, b):
    """Cosine similarity of the flattened operands, in [-1, 1].

    A zero-norm operand yields 0 with a ZeroNormWarning instead of an error.
    """
    a, b = as_node(a), as_node(b)
    av = a.value.reshape(-1).astype(np.float64)
    bv = b.value.reshape(-1).astype(np.float64)
    na = float(np.sqrt(np.dot(av, av)))
    nb = float(np.sqrt(np.dot(bv, bv)))
    if na == 0.0 or nb == 0.0:
        warnings.warn("cosine_similarity: zero-norm operand, result defined as 0", ZeroNormWarning)
        return _make(np.asarray(0.0, dtype=a.dtype), "cosine_similarity", (a, b), None)
    s = float(np.dot(av, bv) / (na * nb))
    val = np.asarray(min(1.0, max(-1.0, s)), dtype=a.dtype)
    out = _make(val, "cosine_similarity", (a, b), None)
    if out.requires_grad:
        ash, bsh = a.value.shape, b.value.shape

        def backward(g):
            gf = float(g)
            ga = gf * (bv / (na * nb) - s * av / (na * na))
            gb = gf * (av / (na * nb) - s * bv / (nb * nb))
            _accum(a, ga.reshape(ash).astype(a.dtype))
            _accum(b, gb.reshape(bsh).astype(b.dtype))
        out._backward = backward
    return out


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def backward(root):
    """Populate gradients of every reachable node requiring grad.

    Gradients are re-derived from scratch on every call, so repeated backward
    from the same root yields bit-identical results.
    """
    if root.value.shape != ():
        raise ValueError(f"backward: root must be scalar, got shape {root.value.shape}")
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    for node in order:
        node.grad = None
    root.grad = np.asarray(1.0, dtype=root.dtype)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def reachable_ops(root):
    """Set of op tags reachable from a node (ablation structure checks)."""
    ops = set()
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        ops.add(node.op)
        stack.extend(node.parents)
    return ops


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def gradient_check(builder, arrays, rng=None, coords_per_input=20, h=1e-3):
    """Max relative error between analytic and central finite-difference grads.

    ``builder`` maps one DiffNode per input array to a scalar DiffNode and must
    be deterministic (any randomness fixed in its closure).  Finite differences
    use step ``h`` with 64-bit accumulation of the 2 function values; a random
    subset of coordinates per input is probed.  The relative error is
    ``max|analytic - numeric| / max(inf-norms, 1e-6)`` over probed coordinates.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    arrays = [np.asarray(a) for a in arrays]
    nodes = [parameter(a) for a in arrays]
    root = builder(*nodes)
    backward(root)
    analytic = [n.grad if n.grad is not None else np.zeros_like(n.value) for n in nodes]

    def eval_at(replaced, i):
        vals = [parameter(a) if j != i else parameter(replaced) for j, a in enumerate(arrays)]
        return float(builder(*vals).value)

    worst = 0.0
    for i, a in enumerate(arrays):
        size = a.size
        if size == 0:
            continue
        k = min(coords_per_input, size)
        idx = rng.choice(size, size=k, replace=False)
        diffs = np.empty(k, dtype=np.float64)
        ana = analytic[i].reshape(-1)[idx].astype(np.float64)
        for t, j in enumerate(idx):
            pert = a.copy()
            flat = pert.reshape(-1)
            orig = flat[j]
            flat[j] = orig + h
            fp = eval_at(pert, i)
            flat[j] = orig - h
            fm = eval_at(pert, i)
            diffs[t] = (fp - fm) / (2.0 * h)
        denom = max(float(np.max(np.abs(ana), initial=0.0)),
                    float(np.max(np.abs(diffs), initial=0.0)), 1e-6)
        worst = max(worst, float(np.max(np.abs(ana - diffs))) / denom)
    return worst


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Per-parameter adaptive-moment state."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_update(value, grad, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, in place, in the parameter's dtype."""
    dt = value.dtype.type
    b1, b2, e = dt(beta1), dt(beta2), dt(eps)
    one = dt(1.0)
    state.t += 1
    state.m = b1 * state.m + (one - b1) * grad
    state.v = b2 * state.v + (one - b2) * (grad * grad)
    mhat = state.m / (one - dt(beta1 ** state.t))
    vhat = state.v / (one - dt(beta2 ** state.t))
    value -= dt(lr) * mhat / (np.sqrt(vhat) + e)


class Adam:
    """Adaptive-moment optimizer over a name -> DiffNode parameter dict."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = {
            name: AdamState(np.zeros_like(p.value), np.zeros_like(p.value))
            for name, p in params.items()
        }

    def step(self):
        for name, p in self.params.items():
            if p.grad is None:
                raise ValueError(f"adam step: parameter '{name}' has no gradient")
            adam_update(p.value, p.grad, self.state[name], self.lr, self.beta1, self.beta2, self.eps)


# ---------------------------------------------------------------------------
# deterministic splittable PRNG
# ---------------------------------------------------------------------------

class RngStream:
    """Counter-based (Philox) random stream, splittable by string label.

    Children derive their keys by hashing the parent key with the label, so any
    (seed, path-of-labels) pair names the same stream on every platform.
    """

    def __init__(self, seed=0, _key=None):
        if _key is None:
            _key = hashlib.blake2b(int(seed).to_bytes(8, "little", signed=False),
                                   digest_size=16).digest()
        self._key = _key
        self._gen = np.random.Generator(np.random.Philox(key=int.from_bytes(_key, "little")))

    def split(self, label):
        child = hashlib.blake2b(self._key + label.encode("utf-8"), digest_size=16).digest()
        return RngStream(_key=child)

    def normal(self, shape, mean=0.0, std=1.0):
        return self._gen.normal(mean, std, size=shape)

    def uniform(self, shape, low=0.0, high=1.0):
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def bits(self, n):
        """n i.i.d. uniform bits as uint8."""
        return self._gen.integers(0, 2, size=n, dtype=np.uint8)

    def choice_without_replacement(self, n, k):
        return self._gen.choice(n, size=k, replace=False)

    def shuffle(self, arr):
        self._gen.shuffle(arr)
        return arr
