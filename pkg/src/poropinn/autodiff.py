"""Minimal reverse-mode automatic differentiation over numpy arrays.

A :class:`Tensor` wraps an ndarray and records the operation that produced it.
Calling :meth:`Tensor.backward` on a scalar walks the recorded graph in reverse
topological order and accumulates ``.grad`` on every tensor that requires it.

The forward arithmetic of every op is the plain numpy expression applied to
``.data``, so code written against the helpers in this module (``tanh``,
``mean``, operators) produces bit-identical values whether it is fed ndarrays
or Tensors.
"""

import numpy as np


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _is_basic_index(idx):
    if not isinstance(idx, tuple):
        idx = (idx,)
    return all(isinstance(i, (int, slice, type(Ellipsis), type(None))) for i in idx)


class Tensor:
    __array_ufunc__ = None  # make ndarray <op> Tensor defer to the reflected Tensor op

    def __init__(self, data, requires_grad=False, parents=(), backward_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = parents
        self._backward_fn = backward_fn

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _lift(x):
        return x if isinstance(x, Tensor) else Tensor(x)

    @classmethod
    def _from_op(cls, data, parents, backward_fn):
        live = tuple(p for p in parents if p.requires_grad)
        if not live:
            return cls(data)
        return cls(data, requires_grad=True, parents=parents, backward_fn=backward_fn)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __len__(self):
        return len(self.data)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = Tensor._lift(other)
        a, b = self, other

        def back(g):
            return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

        return Tensor._from_op(a.data + b.data, (a, b), back)

    def __radd__(self, other):
        other = Tensor._lift(other)
        return other.__add__(self)

    def __sub__(self, other):
        other = Tensor._lift(other)
        a, b = self, other

        def back(g):
            return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

        return Tensor._from_op(a.data - b.data, (a, b), back)

    def __rsub__(self, other):
        other = Tensor._lift(other)
        return other.__sub__(self)

    def __mul__(self, other):
        other = Tensor._lift(other)
        a, b = self, other

        def back(g):
            return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

        return Tensor._from_op(a.data * b.data, (a, b), back)

    def __rmul__(self, other):
        other = Tensor._lift(other)
        return other.__mul__(self)

    def __neg__(self):
        a = self
        return Tensor._from_op(-a.data, (a,), lambda g: (-g,))

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("division by a Tensor is not supported")
        a = self
        return Tensor._from_op(a.data / other, (a,), lambda g: (g / other,))

    def __matmul__(self, other):
        other = Tensor._lift(other)
        a, b = self, other
        if b.ndim != 2:
            raise ValueError("right operand of @ must be 2-D")

        def back(g):
            ga = g @ b.data.T
            if a.ndim == 1:
                gb = np.outer(a.data, g)
            else:
                gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            return ga, gb

        return Tensor._from_op(a.data @ b.data, (a, b), back)

    def __rmatmul__(self, other):
        return Tensor._lift(other).__matmul__(self)

    # -- shape ops ----------------------------------------------------------------

    def __getitem__(self, idx):
        a = self
        basic = _is_basic_index(idx)

        def back(g):
            out = np.zeros_like(a.data)
            if basic:
                out[idx] += g
            else:
                np.add.at(out, idx, g)
            return (out,)

        return Tensor._from_op(a.data[idx], (a,), back)

    def reshape(self, *shape):
        a = self
        return Tensor._from_op(a.data.reshape(*shape), (a,), lambda g: (g.reshape(a.shape),))

    def transpose(self, *axes):
        a = self
        if not axes:
            axes = tuple(reversed(range(a.ndim)))
        inverse = tuple(np.argsort(axes))
        return Tensor._from_op(a.data.transpose(axes), (a,), lambda g: (g.transpose(inverse),))

    @property
    def T(self):
        return self.transpose()

    # -- reductions and elementwise functions -----------------------------------------

    def sum(self, axis=None):
        a = self

        def back(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, a.shape).copy(),)

        return Tensor._from_op(np.sum(a.data, axis=axis), (a,), back)

    def mean(self, axis=None):
        a = self
        count = a.data.size if axis is None else a.shape[axis]

        def back(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g / count, a.shape).copy(),)

        return Tensor._from_op(np.mean(a.data, axis=axis), (a,), back)

    def tanh(self):
        a = self
        s = np.tanh(a.data)
        return Tensor._from_op(s, (a,), lambda g: (g * (1.0 - s * s),))

    def exp(self):
        a = self
        e = np.exp(a.data)
        return Tensor._from_op(e, (a,), lambda g: (g * e,))

    # -- reverse pass ---------------------------------------------------------------

    def backward(self, seed=None):
        """Accumulate d(self)/d(leaf) into ``leaf.grad`` for every leaf requiring grad."""
        if seed is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed needs a scalar output")
            seed = np.ones_like(self.data)
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))

        grads = {id(self): np.asarray(seed, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward_fn is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward_fn(g)):
                if not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def tanh(x):
    return x.tanh() if isinstance(x, Tensor) else np.tanh(x)


def exp(x):
    return x.exp() if isinstance(x, Tensor) else np.exp(x)


def mean(x, axis=None):
    return x.mean(axis=axis) if isinstance(x, Tensor) else np.mean(x, axis=axis)


def value(x):
    """Return the raw ndarray behind ``x`` (no-op for ndarrays)."""
    return x.data if isinstance(x, Tensor) else np.asarray(x)
