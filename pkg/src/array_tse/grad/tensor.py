"""Reverse-mode autodiff over dense numpy arrays.

Kept deliberately small: elementwise arithmetic, matmul, shape ops, reductions
and the pointwise nonlinearities the two networks need. Broadcasting is
restricted to leading-dimension expansion (the smaller operand's shape must be
a suffix of the larger one's); anything else is a shape error.

Training runs in float32; grad_check rebuilds the same graphs in float64.
"""

import contextlib
import threading

import numpy as np

DEFAULT_DTYPE = np.float32


class ShapeError(ValueError):
    pass


_state = threading.local()


def grad_enabled():
    return getattr(_state, "grad_enabled", True)


@contextlib.contextmanager
def no_grad():
    prev = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def finite_checks_enabled():
    return getattr(_state, "finite_checks", False)


def set_finite_checks(on):
    _state.finite_checks = bool(on)


@contextlib.contextmanager
def finite_checks(on=True):
    prev = finite_checks_enabled()
    _state.finite_checks = bool(on)
    try:
        yield
    finally:
        _state.finite_checks = prev


def _check_finite(data, op):
    if finite_checks_enabled() and not np.isfinite(data).all():
        raise FloatingPointError(f"{op}: non-finite values in result")


def _coerce(data):
    arr = np.asarray(data)
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(DEFAULT_DTYPE)
    return arr


class Tensor:
    """Immutable dense array plus the graph edge that produced it."""

    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = _coerce(data)
        if any(d <= 0 for d in self.data.shape):
            raise ShapeError(f"tensor dims must be positive, got {self.data.shape}")
        self.requires_grad = bool(requires_grad) and grad_enabled()
        self.grad = None
        self.name = name
        self._parents = None
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def numpy(self):
        return self.data

    def is_leaf(self):
        return self._parents is None

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, grad={self.requires_grad}{tag})"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(_wrap(other, self.dtype), self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(_wrap(other, self.dtype), self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(_wrap(other, self.dtype), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)

    def sum(self, axis=None, keepdims=False):
        return reduce_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return reduce_mean(self, axis, keepdims)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def sqrt(self):
        return sqrt(self)

    def tanh(self):
        return tanh(self)

    def sigmoid(self):
        return sigmoid(self)


def _wrap(value, dtype):
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def _make(data, parents, backward_fn, op):
    """Wrap an op result, recording the graph edge when gradients are live."""
    _check_finite(data, op)
    req = grad_enabled() and any(p.requires_grad for p in parents)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.requires_grad = req
    out.grad = None
    out.name = None
    out._parents = None
    out._backward = None
    if req:
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _suffix_ok(small, big):
    n = len(small)
    return n == 0 or (n <= len(big) and tuple(big[-n:]) == tuple(small))


def _check_elementwise(a, b, op):
    if a.shape == b.shape:
        return
    if _suffix_ok(b.shape, a.shape) or _suffix_ok(a.shape, b.shape):
        return
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not conform "
                     "(equal or leading-dim broadcast only)")


def _reduce_to(grad, shape):
    """Sum out the leading axes a suffix-broadcast introduced."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    return grad


# -- elementwise arithmetic ---------------------------------------------------


def add(a, b):
    a = _wrap(a, getattr(b, "dtype", DEFAULT_DTYPE)) if not isinstance(a, Tensor) else a
    b = _wrap(b, a.dtype)
    _check_elementwise(a, b, "add")
    data = a.data + b.data

    def bw(g):
        return [(a, _reduce_to(g, a.shape)), (b, _reduce_to(g, b.shape))]

    return _make(data, (a, b), bw, "add")


def sub(a, b):
    a = _wrap(a, getattr(b, "dtype", DEFAULT_DTYPE)) if not isinstance(a, Tensor) else a
    b = _wrap(b, a.dtype)
    _check_elementwise(a, b, "sub")
    data = a.data - b.data

    def bw(g):
        return [(a, _reduce_to(g, a.shape)), (b, _reduce_to(-g, b.shape))]

    return _make(data, (a, b), bw, "sub")


def mul(a, b):
    a = _wrap(a, getattr(b, "dtype", DEFAULT_DTYPE)) if not isinstance(a, Tensor) else a
    b = _wrap(b, a.dtype)
    _check_elementwise(a, b, "mul")
    data = a.data * b.data

    def bw(g):
        return [(a, _reduce_to(g * b.data, a.shape)),
                (b, _reduce_to(g * a.data, b.shape))]

    return _make(data, (a, b), bw, "mul")


def div(a, b):
    a = _wrap(a, getattr(b, "dtype", DEFAULT_DTYPE)) if not isinstance(a, Tensor) else a
    b = _wrap(b, a.dtype)
    _check_elementwise(a, b, "div")
    data = a.data / b.data

    def bw(g):
        return [(a, _reduce_to(g / b.data, a.shape)),
                (b, _reduce_to(-g * a.data / (b.data * b.data), b.shape))]

    return _make(data, (a, b), bw, "div")


def neg(a):
    def bw(g):
        return [(a, -g)]

    return _make(-a.data, (a,), bw, "neg")


# -- matmul and shape ops ------------------------------------------------------


def matmul(a, b):
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul: operands must be at least 2-D, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: inner dims differ: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def bw(g):
        ga = _reduce_to(g @ np.swapaxes(b.data, -1, -2), a.shape)
        gb = _reduce_to(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        return [(a, ga), (b, gb)]

    return _make(data, (a, b), bw, "matmul")


def transpose(a, axes=None):
    axes = tuple(axes) if axes is not None else tuple(reversed(range(a.ndim)))
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError(f"transpose: axes {axes} invalid for shape {a.shape}")
    inv = tuple(np.argsort(axes))
    data = np.ascontiguousarray(a.data.transpose(axes))

    def bw(g):
        return [(a, np.ascontiguousarray(g.transpose(inv)))]

    return _make(data, (a,), bw, "transpose")


def reshape(a, shape):
    shape = tuple(int(s) for s in shape)
    data = a.data.reshape(shape)
    orig = a.shape

    def bw(g):
        return [(a, g.reshape(orig))]

    return _make(data, (a,), bw, "reshape")


def concat(tensors, axis=0):
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat: need at least one tensor")
    base = list(tensors[0].shape)
    for t in tensors[1:]:
        other = list(t.shape)
        if len(other) != len(base) or any(
            i != axis % len(base) and other[i] != base[i] for i in range(len(base))
        ):
            raise ShapeError(f"concat: shape {t.shape} incompatible with {tensors[0].shape} "
                             f"along axis {axis}")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        parts = np.split(g, splits, axis=axis)
        return list(zip(tensors, parts))

    return _make(data, tuple(tensors), bw, "concat")


def take(a, key):
    """Basic (non-repeating) indexing: slices, ints, ellipsis."""
    data = a.data[key]
    if data.size == 0:
        raise ShapeError(f"slice of shape {a.shape} with {key!r} is empty")
    data = np.ascontiguousarray(data)

    def bw(g):
        full = np.zeros_like(a.data)
        full[key] = g
        return [(a, full)]

    return _make(data, (a,), bw, "slice")


# -- reductions ---------------------------------------------------------------


def _norm_axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def reduce_sum(a, axis=None, keepdims=False):
    axes = _norm_axes(axis, a.ndim)
    data = a.data.sum(axis=axes, keepdims=keepdims)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return [(a, np.broadcast_to(g, a.shape).copy())]

    return _make(np.asarray(data), (a,), bw, "sum")


def reduce_mean(a, axis=None, keepdims=False):
    axes = _norm_axes(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes]))
    data = a.data.mean(axis=axes, keepdims=keepdims)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return [(a, np.broadcast_to(g / count, a.shape).astype(a.dtype, copy=True))]

    return _make(np.asarray(data), (a,), bw, "mean")


# -- pointwise nonlinearities ---------------------------------------------------


def exp(a):
    data = np.exp(a.data)

    def bw(g):
        return [(a, g * data)]

    return _make(data, (a,), bw, "exp")


def log(a):
    data = np.log(a.data)

    def bw(g):
        return [(a, g / a.data)]

    return _make(data, (a,), bw, "log")


def sqrt(a):
    data = np.sqrt(a.data)

    def bw(g):
        return [(a, g / (2.0 * data))]

    return _make(data, (a,), bw, "sqrt")


def tanh(a):
    data = np.tanh(a.data)

    def bw(g):
        return [(a, g * (1.0 - data * data))]

    return _make(data, (a,), bw, "tanh")


def sigmoid(a):
    data = 1.0 / (1.0 + np.exp(-np.abs(a.data)))
    data = np.where(a.data >= 0, data, 1.0 - data)

    def bw(g):
        return [(a, g * data * (1.0 - data))]

    return _make(data, (a,), bw, "sigmoid")


# -- custom functions -----------------------------------------------------------


class Function:
    """Hand-written forward/backward pair for ops beyond the composable core.

    Subclasses implement forward(*arrays, **kw) -> ndarray, stashing whatever
    backward needs on self, and backward(grad) -> one gradient array (or None)
    per tensor input, in order.
    """

    def forward(self, *arrays, **kwargs):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError


def apply_function(fn, *inputs, **kwargs):
    arrays = [t.data for t in inputs]
    data = fn.forward(*arrays, **kwargs)

    def bw(g):
        grads = fn.backward(g)
        return [(p, pg) for p, pg in zip(inputs, grads) if pg is not None]

    return _make(data, inputs, bw, type(fn).__name__)


# -- backward pass --------------------------------------------------------------


def _topo_order(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        if node._parents is not None:
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
    return order


def backward(loss, retain_graph=False):
    """Propagate d(loss)/d(leaf) into every requires_grad leaf.

    Returns {leaf Tensor: gradient ndarray}; also accumulates into leaf.grad.
    The graph is released afterwards unless retain_graph is set.
    """
    if loss.size != 1:
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ValueError("backward: loss does not require grad (no graph recorded)")
    if not np.isfinite(loss.data).all():
        raise FloatingPointError("backward: loss is not finite")

    order = _topo_order(loss)
    grads = {id(loss): np.ones_like(loss.data)}
    leaf_grads = {}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._parents is None:
            node.grad = g if node.grad is None else node.grad + g
            leaf_grads[node] = node.grad
            continue
        for parent, pg in node._backward(g):
            pid = id(parent)
            if pid in grads:
                grads[pid] = grads[pid] + pg
            else:
                grads[pid] = pg
    if not retain_graph:
        for node in order:
            if node._parents is not None:
                node._parents = None
                node._backward = None
    return leaf_grads
