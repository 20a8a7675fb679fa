"""Feed-forward networks, Adam, and the sequence-model training loop.

Networks are built from fused affine nodes (see ``autodiff.linear``) with
ELU hidden activations and an optional bounded tanh output head.  Decoder
networks are built entirely without bias terms so that zero input maps to
zero output exactly.
"""

import copy
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

_ACTIVATIONS = {"elu": ad.elu, "tanh": ad.tanh, "linear": lambda x: x}


class Mlp:
    """Fully-connected network with a fixed activation plan.

    Parameters
    ----------
    sizes : sequence of int
        Layer widths including input and output, e.g. ``(92, 125, 125, 480)``.
    hidden_activation : str
        Applied after every layer but the last (default ``"elu"``).
    output_activation : str
        Applied after the last layer (``"tanh"`` or ``"linear"``).
    bias : bool
        When False no layer carries a bias vector.
    rng : numpy Generator, optional
        Weights are drawn from U(-sqrt(1/fan_in), sqrt(1/fan_in)).
    """

    def __init__(self, sizes, hidden_activation="elu", output_activation="linear",
                 bias=True, rng=None):
        if len(sizes) < 2:
            raise ValueError("an Mlp needs at least input and output sizes")
        if rng is None:
            rng = np.random.default_rng()
        self.sizes = tuple(int(s) for s in sizes)
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.bias = bool(bias)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = np.sqrt(1.0 / fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out) if self.bias else None)

    @property
    def in_size(self):
        return self.sizes[0]

    @property
    def out_size(self):
        return self.sizes[-1]

    def parameters(self):
        """Flat list of parameter arrays (weights, then biases where present)."""
        params = list(self.weights)
        params.extend(b for b in self.biases if b is not None)
        return params

    def forward(self, x, tape=None):
        """Evaluate the network on ``x`` of shape (..., in_size).

        With a tape, parameters are wrapped as cached leaves so gradients
        accumulate over repeated calls within the same tape.
        """
        h = x
        if ad.value_of(x).shape[-1] != self.in_size:
            raise ValueError(
                f"input width {ad.value_of(x).shape[-1]} != expected {self.in_size}")
        n_layers = len(self.weights)
        hid = _ACTIVATIONS[self.hidden_activation]
        out = _ACTIVATIONS[self.output_activation]
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if tape is not None:
                W = tape.leaf_for(W)
                b = tape.leaf_for(b) if b is not None else None
            h = ad.linear(h, W, b)
            h = hid(h) if i < n_layers - 1 else out(h)
        return h

    __call__ = forward

    def copy_parameters(self):
        return [p.copy() for p in self.parameters()]

    def set_parameters(self, values):
        for p, v in zip(self.parameters(), values):
            p[...] = v

    def grads_from(self, tape):
        """Gradients of the last backward pass w.r.t. this net's parameters."""
        grads = []
        for p in self.parameters():
            node = tape._leaf_cache.get(id(p))
            grads.append(np.zeros_like(p) if node is None or node.grad is None
                         else node.grad)
        return grads

    def spec(self):
        return {
            "sizes": list(self.sizes),
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
            "bias": self.bias,
        }

    @classmethod
    def from_spec(cls, spec):
        return cls(spec["sizes"], spec["hidden_activation"],
                   spec["output_activation"], spec["bias"],
                   rng=np.random.default_rng(0))


@dataclass
class AdamState:
    """First/second moment buffers and the step counter."""

    m: list
    v: list
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params):
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, lr):
    """Standard Adam update with bias correction; updates params in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


#: Piecewise-constant learning-rate table: rate holds from its start epoch.
DEFAULT_LR_TABLE = ((0, 1e-3), (100, 5e-4), (200, 2.5e-4))


def learning_rate(epoch, table=DEFAULT_LR_TABLE):
    lr = table[0][1]
    for start, rate in table:
        if epoch >= start:
            lr = rate
    return lr


@dataclass
class TrainConfig:
    epochs: int = 300
    batch_size: int = 128
    lr_table: tuple = DEFAULT_LR_TABLE
    test_fraction: float = 0.2          # 4:1 train/test split
    patience: int = 30                  # early stopping on test loss
    seed: int = 0
    solver: object = None               # SolverConfig; model default when None
    shuffle: bool = True
    verbose: bool = False


@dataclass
class TrainResult:
    train_loss: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    best_epoch: int = -1
    best_test_loss: float = np.inf
    stopped_early: bool = False


def sequence_mse(pred, labels):
    """(1/N) * sum_n sum_t ||pred - label||^2 for (N, T, K) arrays."""
    pred = np.asarray(pred, dtype=float)
    labels = np.asarray(labels, dtype=float)
    n = pred.shape[0]
    return float(np.sum((pred - labels) ** 2) / n)


def train(model, dataset, cfg: TrainConfig):
    """Minibatch Adam on the sequence MSE of a stress-predictor model.

    ``model`` must provide ``sequence_loss(strain, labels, solver, tape)``
    returning a scalar loss node, ``trainable`` (list of Mlp), and
    ``predict_normalized(strain, solver)`` for evaluation; ``dataset``
    provides normalized inputs/labels via ``training_arrays()``.

    The loss is the per-sample mean of the per-step summed squared error.
    Early stopping watches the test loss and restores the best parameters.
    """
    strain, labels = dataset.training_arrays()
    n_samples = strain.shape[0]
    if n_samples == 0:
        raise ValueError("dataset is empty")

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n_samples) if cfg.shuffle else np.arange(n_samples)
    n_test = max(1, int(round(n_samples * cfg.test_fraction)))
    test_idx, train_idx = order[:n_test], order[n_test:]
    if train_idx.size == 0:
        raise ValueError("dataset too small for the requested test split")

    params = [p for net in model.trainable for p in net.parameters()]
    adam = AdamState.for_params(params)
    result = TrainResult()
    best_params = None
    solver = cfg.solver if cfg.solver is not None else model.default_solver

    for epoch in range(cfg.epochs):
        lr = learning_rate(epoch, cfg.lr_table)
        perm = rng.permutation(train_idx) if cfg.shuffle else train_idx
        epoch_loss = 0.0
        for start in range(0, perm.size, cfg.batch_size):
            batch = perm[start:start + cfg.batch_size]
            tape = ad.Tape()
            loss = model.sequence_loss(strain[batch], labels[batch], solver, tape)
            tape.backward(loss)
            grads = [g for net in model.trainable for g in net.grads_from(tape)]
            adam_step(params, grads, adam, lr)
            epoch_loss += float(loss.value) * batch.size
        result.train_loss.append(epoch_loss / perm.size)

        pred = model.predict_normalized(strain[test_idx], solver)
        test_loss = sequence_mse(pred, labels[test_idx])
        result.test_loss.append(test_loss)
        if cfg.verbose:
            print(f"epoch {epoch:4d}  lr {lr:.1e}  "
                  f"train {result.train_loss[-1]:.6f}  test {test_loss:.6f}")

        if test_loss < result.best_test_loss:
            result.best_test_loss = test_loss
            result.best_epoch = epoch
            best_params = [p.copy() for p in params]
        elif cfg.patience > 0 and epoch - result.best_epoch >= cfg.patience:
            result.stopped_early = True
            break

    if best_params is not None:
        for p, b in zip(params, best_params):
            p[...] = b
    return model, result


def save_checkpoint(path, meta, nets):
    """Write ``model.json`` plus raw little-endian ``weights.f64``.

    ``meta`` is any JSON-serializable dict (architecture, norm constants,
    output mode); ``nets`` is an ordered mapping name -> Mlp.  Weight arrays
    are written in declared order: per net, layer weights then biases.
    """
    os.makedirs(path, exist_ok=True)
    doc = dict(meta)
    doc["networks"] = {name: net.spec() for name, net in nets.items()}
    doc["parameter_order"] = {
        name: [list(p.shape) for p in net.parameters()] for name, net in nets.items()
    }
    with open(os.path.join(path, "model.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    with open(os.path.join(path, "weights.f64"), "wb") as fh:
        for net in nets.values():
            for p in net.parameters():
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Read a checkpoint directory; returns (meta dict, {name: Mlp})."""
    with open(os.path.join(path, "model.json")) as fh:
        doc = json.load(fh)
    raw = np.fromfile(os.path.join(path, "weights.f64"), dtype="<f8")
    nets = {}
    offset = 0
    for name, spec in doc["networks"].items():
        net = Mlp.from_spec(spec)
        values = []
        for shape in doc["parameter_order"][name]:
            size = int(np.prod(shape))
            values.append(raw[offset:offset + size].reshape(shape))
            offset += size
        net.set_parameters(values)
        nets[name] = net
    if offset != raw.size:
        raise ValueError("weights.f64 size does not match declared parameters")
    return doc, nets
