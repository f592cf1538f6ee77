"""Fully-connected tanh network with exact input-derivative propagation.

Alongside the layer values, every evaluation point carries the Jacobian of
the current layer with respect to the three inputs and the six distinct
second derivatives.  Through an affine layer both are multiplied by the
weight matrix; through ``s = tanh(a)``::

    J' = (1 - s^2) J
    H' = (1 - s^2) H - 2 s (1 - s^2) (J outer J)

with ``J`` and ``H`` taken at the pre-activation.  The same code runs on
ndarrays (plain evaluation) and on :class:`~poropinn.autodiff.Tensor`
(recorded for parameter gradients), so the two produce identical values.
"""

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import DimensionError, InputError, NumericError

N_INPUTS = 3
N_OUTPUTS = 3

# (j, k) for the six distinct second derivatives, and the map from a full 3x3
# index (flattened j*3 + k) onto those six.
PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_PAIR_J = np.array([p[0] for p in PAIRS])
_PAIR_K = np.array([p[1] for p in PAIRS])
FULL_FROM_PAIR = np.array(
    [PAIRS.index((min(j, k), max(j, k))) for j in range(3) for k in range(3)]
)


@dataclass(frozen=True)
class LayerSpec:
    input_dim: int = 3
    hidden_layers: int = 5
    hidden_units: int = 20
    output_dim: int = 3
    hidden_activation: str = "tanh"
    output_activation: str = "linear"

    def __post_init__(self):
        for name in ("input_dim", "hidden_units", "output_dim"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")
        # 0 hidden layers is allowed so tests can build a single affine map.
        if not isinstance(self.hidden_layers, (int, np.integer)) or self.hidden_layers < 0:
            raise DimensionError(f"hidden_layers must be >= 0, got {self.hidden_layers!r}")
        if self.hidden_activation != "tanh":
            raise DimensionError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_activation != "linear":
            raise DimensionError(f"unsupported output activation {self.output_activation!r}")

    @property
    def widths(self):
        return [self.input_dim] + [self.hidden_units] * self.hidden_layers + [self.output_dim]

    @property
    def layer_shapes(self):
        """(rows, cols) of each weight matrix."""
        w = self.widths
        return [(w[i + 1], w[i]) for i in range(len(w) - 1)]


@dataclass(frozen=True)
class MlpParams:
    """Network weights; ``weights[l]`` has shape (fan_out, fan_in).

    Entries are ndarrays for ordinary use; :func:`grad_scalar` builds a
    traced copy whose entries are Tensors.
    """

    spec: LayerSpec
    weights: tuple
    biases: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "biases", tuple(self.biases))
        shapes = self.spec.layer_shapes
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise DimensionError(
                f"expected {len(shapes)} weight/bias blocks, got "
                f"{len(self.weights)}/{len(self.biases)}"
            )
        for i, (w, b, shape) in enumerate(zip(self.weights, self.biases, shapes)):
            if tuple(w.shape) != shape:
                raise DimensionError(f"weights[{i}] has shape {tuple(w.shape)}, expected {shape}")
            if tuple(b.shape) != (shape[0],):
                raise DimensionError(f"biases[{i}] has shape {tuple(b.shape)}, expected {(shape[0],)}")

    @property
    def n_layers(self):
        return len(self.weights)

    def blocks(self):
        """Iterate over (name, array) for every parameter block in a fixed order."""
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"weights[{i}]", w
            yield f"biases[{i}]", b

    def flat(self):
        return np.concatenate([ad.value(a).ravel() for _, a in self.blocks()])

    def with_flat(self, vector):
        """Return a copy whose parameters are taken from a flat vector (``flat`` order)."""
        vector = np.asarray(vector, dtype=np.float64)
        out_w, out_b, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            n = w.size
            out_w.append(vector[pos:pos + n].reshape(w.shape).copy())
            pos += n
            out_b.append(vector[pos:pos + b.size].copy())
            pos += b.size
        if pos != vector.size:
            raise DimensionError(f"flat vector has {vector.size} entries, expected {pos}")
        return MlpParams(self.spec, out_w, out_b)

    @property
    def size(self):
        return sum(ad.value(a).size for _, a in self.blocks())


@dataclass(frozen=True)
class ParamGradient:
    """Gradient with one entry per weight/bias entry of the matching MlpParams."""

    weights: tuple
    biases: tuple

    def blocks(self):
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"weights[{i}]", w
            yield f"biases[{i}]", b

    def flat(self):
        return np.concatenate([a.ravel() for _, a in self.blocks()])

    @classmethod
    def zeros_like(cls, params):
        return cls(
            tuple(np.zeros_like(ad.value(w)) for w in params.weights),
            tuple(np.zeros_like(ad.value(b)) for b in params.biases),
        )


@dataclass(frozen=True)
class DerivBundle:
    """Network (or reference) outputs with exact input derivatives.

    ``jacobian[..., i, j]`` is d(output i)/d(input j); ``hessians[..., i, j, k]``
    is d2(output i)/d(input j)d(input k).  Leading batch dimensions are
    allowed; a single point has shapes (3,), (3, 3), (3, 3, 3).
    """

    point: object
    value: object
    jacobian: object
    hessians: object = field(repr=False)


def init_params(spec, seed):
    """Glorot-uniform weights, zero biases, fully determined by ``seed``."""
    if not isinstance(spec, LayerSpec):
        raise DimensionError("spec must be a LayerSpec")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_out, fan_in in spec.layer_shapes:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(spec, weights, biases)


def _as_points(points, n_inputs):
    x = np.asarray(points, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != n_inputs:
        raise InputError(f"points must have shape (N, {n_inputs}), got {np.shape(points)}")
    if not np.all(np.isfinite(x)):
        raise InputError("evaluation points must be finite")
    return x, single


def _forward_values(params, x):
    h = x
    last = params.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = h @ w.T + b
        h = a if i == last else ad.tanh(a)
    return h


def _affine(state, w, b):
    a, jac, hp = state
    wt = w.T
    return a @ wt + b, jac @ wt, hp @ wt


def _tanh_layer(state):
    a, jac, hp = state
    s = ad.tanh(a)
    d = 1.0 - s * s
    d3 = d.reshape(d.shape[0], 1, d.shape[1])
    sd = (s * d).reshape(d.shape[0], 1, d.shape[1])
    outer = jac[:, _PAIR_J, :] * jac[:, _PAIR_K, :]
    return s, d3 * jac, d3 * hp - 2.0 * sd * outer


def _propagate(params, x):
    """Push values, Jacobians (N, in, width) and Hessian pairs (N, 6, width) through the net."""
    n = x.shape[0]
    n_in = params.spec.input_dim
    jac = np.broadcast_to(np.eye(n_in, dtype=x.dtype), (n, n_in, n_in))
    n_pairs = n_in * (n_in + 1) // 2
    hp = np.zeros((n, n_pairs, n_in), dtype=x.dtype)
    state = (x, jac, hp)
    last = params.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        state = _affine(state, w, b)
        if i != last:
            state = _tanh_layer(state)
    return state


def _assemble(x, state, single):
    value, jac, hp = state
    n = x.shape[0]
    n_out = value.shape[1]
    jacobian = jac.transpose(0, 2, 1)
    hessians = hp[:, FULL_FROM_PAIR, :].reshape(n, 3, 3, n_out).transpose(0, 3, 1, 2)
    if single:
        return DerivBundle(x[0], value[0], jacobian[0], hessians[0])
    return DerivBundle(x, value, jacobian, hessians)


def forward(params, point):
    """Evaluate the network at one point (shape (3,)) or a batch (shape (N, 3))."""
    x, single = _as_points(point, params.spec.input_dim)
    out = _forward_values(params, x)
    return out[0] if single else out


def forward_with_derivs(params, point):
    """Evaluate outputs together with their exact input Jacobian and Hessians.

    Accepts a single point or an (N, 3) batch; a batch yields a DerivBundle
    with a leading batch axis on every field.
    """
    x, single = _as_points(point, params.spec.input_dim)
    if params.spec.input_dim != 3:
        raise DimensionError("derivative propagation is defined for 3 inputs (x, z, t)")
    return _assemble(x, _propagate(params, x), single)


def traced_bundle(params, x):
    """Batch DerivBundle built from whatever array type ``params`` holds (ndarray or Tensor)."""
    return _assemble(x, _propagate(params, x), False)


def traced_forward(params, x):
    return _forward_values(params, x)


def grad_scalar(params, objective):
    """Value and exact parameter gradient of ``objective(params)``.

    ``objective`` receives a traced copy of ``params`` and must build its
    result from :func:`traced_forward` / :func:`traced_bundle` (or any code
    written with the ``autodiff`` helpers); it returns a scalar.
    """
    w_leaves = [ad.Tensor(w, requires_grad=True) for w in params.weights]
    b_leaves = [ad.Tensor(b, requires_grad=True) for b in params.biases]
    traced = MlpParams(params.spec, w_leaves, b_leaves)
    out = objective(traced)
    if not isinstance(out, ad.Tensor):
        # Objective that does not depend on the parameters.
        val = float(np.asarray(out))
        return val, ParamGradient.zeros_like(params)
    if out.data.size != 1:
        raise NumericError("objective must return a scalar")
    val = float(out.data)
    if not np.isfinite(val):
        # still backpropagate so the message can name the blocks involved
        with np.errstate(all="ignore"):
            out.backward()
        bad = [f"{kind}[{i}]" for kind, leaves in (("weights", w_leaves), ("biases", b_leaves))
               for i, t in enumerate(leaves) if t.grad is not None and not np.all(np.isfinite(t.grad))]
        where = ", ".join(bad) if bad else "no single parameter block"
        raise NumericError(f"objective value is not finite ({val}); non-finite gradient in {where}")
    if out.requires_grad:
        out.backward()
    grad_w, grad_b = [], []
    for i, (tw, tb) in enumerate(zip(w_leaves, b_leaves)):
        gw = tw.grad if tw.grad is not None else np.zeros_like(tw.data)
        gb = tb.grad if tb.grad is not None else np.zeros_like(tb.data)
        if not np.all(np.isfinite(gw)):
            raise NumericError(f"non-finite gradient in weights[{i}]")
        if not np.all(np.isfinite(gb)):
            raise NumericError(f"non-finite gradient in biases[{i}]")
        grad_w.append(gw)
        grad_b.append(gb)
    return val, ParamGradient(tuple(grad_w), tuple(grad_b))
