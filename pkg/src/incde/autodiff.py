"""Reverse-mode automatic differentiation on a dynamic tape.

Node values are numpy float64 arrays (any shape, typically batched along the
leading axis), so one tape node per tensor operation is recorded rather than
one per scalar.  Every helper in this module dispatches on its argument
types: called with plain ndarrays it just computes (fast inference path),
called with at least one ``Node`` it records the operation and its
vector-Jacobian products on the node's tape.

Gradients of a scalar (or of one output row via a seed array) are obtained
with ``Tape.backward``; they are exact reverse-mode derivatives with respect
to every leaf reachable from the output.
"""

import numpy as np


class Node:
    """One recorded value. ``parents`` holds (parent, vjp) pairs."""

    __slots__ = ("value", "parents", "tape", "index", "grad")

    def __init__(self, value, parents, tape, index):
        self.value = value
        self.parents = parents
        self.tape = tape
        self.index = index
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    # Arithmetic sugar; constants (ndarray / scalar) are allowed on either side.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Dynamic computation tape; records nodes in execution order."""

    def __init__(self):
        self.nodes = []
        self._leaf_cache = {}

    def _record(self, value, parents):
        node = Node(np.asarray(value, dtype=float), parents, self, len(self.nodes))
        self.nodes.append(node)
        return node

    def leaf(self, value):
        """A fresh input node with no parents."""
        return self._record(value, ())

    def leaf_for(self, array):
        """Leaf cached by array identity.

        Parameters used many times in one pass (layer weights inside an
        unrolled sequence) must map to a single node so their adjoints
        accumulate across all uses.
        """
        key = id(array)
        node = self._leaf_cache.get(key)
        if node is None:
            node = self.leaf(array)
            self._leaf_cache[key] = node
        return node

    def backward(self, output, seed=None):
        """Accumulate adjoints of ``output`` into every reachable node.

        ``seed`` defaults to ones (the usual scalar-loss case).  Existing
        ``grad`` fields are cleared first, so repeated calls with different
        seeds give independent rows of a Jacobian.
        """
        if output.tape is not self:
            raise ValueError("output node does not belong to this tape")
        if not self.nodes:
            raise RuntimeError("backward called before any forward pass")
        for node in self.nodes:
            node.grad = None
        if seed is None:
            output.grad = np.ones_like(output.value)
        else:
            output.grad = np.asarray(seed, dtype=float)
            if output.grad.shape != output.value.shape:
                raise ValueError("seed shape must match output shape")
        for node in reversed(self.nodes[: output.index + 1]):
            g = node.grad
            if g is None:
                continue
            for parent, vjp in node.parents:
                pg = vjp(g)
                if parent.grad is None:
                    parent.grad = pg
                else:
                    parent.grad = parent.grad + pg


def is_node(x):
    return isinstance(x, Node)


def value_of(x):
    return x.value if isinstance(x, Node) else x


def _tape_of(*args):
    for a in args:
        if isinstance(a, Node):
            return a.tape
    return None


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av + bv
    if tape is None:
        return out
    parents = []
    if is_node(a):
        parents.append((a, lambda g, s=np.shape(av): _unbroadcast(g, s)))
    if is_node(b):
        parents.append((b, lambda g, s=np.shape(bv): _unbroadcast(g, s)))
    return tape._record(out, tuple(parents))


def sub(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av - bv
    if tape is None:
        return out
    parents = []
    if is_node(a):
        parents.append((a, lambda g, s=np.shape(av): _unbroadcast(g, s)))
    if is_node(b):
        parents.append((b, lambda g, s=np.shape(bv): _unbroadcast(-g, s)))
    return tape._record(out, tuple(parents))


def mul(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av * bv
    if tape is None:
        return out
    parents = []
    if is_node(a):
        parents.append((a, lambda g, o=bv, s=np.shape(av): _unbroadcast(g * o, s)))
    if is_node(b):
        parents.append((b, lambda g, o=av, s=np.shape(bv): _unbroadcast(g * o, s)))
    return tape._record(out, tuple(parents))


def matmul(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av @ bv
    if tape is None:
        return out
    parents = []
    if is_node(a):
        parents.append((a, lambda g, o=bv: g @ o.T))
    if is_node(b):
        parents.append((b, lambda g, o=av: o.T @ g))
    return tape._record(out, tuple(parents))


def linear(x, W, b=None):
    """Affine map y = x @ W.T (+ b) fused into one node per argument."""
    tape = _tape_of(x, W, b)
    xv, Wv = value_of(x), value_of(W)
    out = xv @ Wv.T
    if b is not None:
        out = out + value_of(b)
    if tape is None:
        return out
    parents = []
    if is_node(x):
        parents.append((x, lambda g, o=Wv: g @ o))
    if is_node(W):
        parents.append((W, lambda g, o=xv: g.T @ o))
    if b is not None and is_node(b):
        parents.append((b, lambda g: g.sum(axis=0) if g.ndim == 2 else g))
    return tape._record(out, tuple(parents))


def tanh(x):
    if not is_node(x):
        return np.tanh(x)
    out = np.tanh(x.value)
    return x.tape._record(out, ((x, lambda g, o=out: g * (1.0 - o * o)),))


def elu(x):
    """ELU: identity for x >= 0, exp(x) - 1 below; C1 at the origin."""
    xv = value_of(x)
    out = np.where(xv >= 0.0, xv, np.expm1(np.minimum(xv, 0.0)))
    if not is_node(x):
        return out
    deriv = np.where(xv >= 0.0, 1.0, out + 1.0)
    return x.tape._record(out, ((x, lambda g, d=deriv: g * d),))


def square(x):
    if not is_node(x):
        return x * x
    return x.tape._record(x.value * x.value, ((x, lambda g, o=x.value: g * (2.0 * o)),))


def concat(parts, axis=-1):
    tape = _tape_of(*parts)
    values = [value_of(p) for p in parts]
    out = np.concatenate(values, axis=axis)
    if tape is None:
        return out
    parents = []
    offset = 0
    for p, v in zip(parts, values):
        n = v.shape[axis]
        if is_node(p):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(offset, offset + n)
            parents.append((p, lambda g, s=tuple(sl): g[s]))
        offset += n
    return tape._record(out, tuple(parents))


def reshape(x, shape):
    if not is_node(x):
        return np.reshape(x, shape)
    out = np.reshape(x.value, shape)
    return x.tape._record(out, ((x, lambda g, s=x.value.shape: g.reshape(s)),))


def batched_matvec(M, d):
    """Row-wise matrix-vector product: (B, H, K) x (B, K) -> (B, H).

    ``d`` may also be a constant (B, K) array while ``M`` is a node, and
    vice versa.
    """
    tape = _tape_of(M, d)
    Mv, dv = value_of(M), value_of(d)
    out = np.einsum("bhk,bk->bh", Mv, dv)
    if tape is None:
        return out
    parents = []
    if is_node(M):
        parents.append((M, lambda g, o=dv: g[:, :, None] * o[:, None, :]))
    if is_node(d):
        parents.append((d, lambda g, o=Mv: np.einsum("bhk,bh->bk", o, g)))
    return tape._record(out, tuple(parents))


def slice_cols(x, start, stop):
    """Column slice x[..., start:stop]."""
    if not is_node(x):
        return x[..., start:stop]
    out = x.value[..., start:stop]

    def vjp(g, s=x.value.shape, a=start, b=stop):
        full = np.zeros(s)
        full[..., a:b] = g
        return full

    return x.tape._record(out, ((x, vjp),))


def sum_all(x):
    if not is_node(x):
        return np.sum(x)
    out = np.asarray(np.sum(x.value))
    return x.tape._record(out, ((x, lambda g, s=x.value.shape: np.broadcast_to(g, s).copy()),))
