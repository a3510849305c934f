"""Layer specs, forward/backward passes, and parameter accounting.

Data layout is NHWC throughout; conv kernels are (kh, kw, c_in, filters),
dense weights are (in, out). Convolution is stride-1 cross-correlation and
pooling strides by its window, the only geometries the engine needs.

Each stateful layer caches whatever its backward pass needs during
forward; a layer instance therefore belongs to one training loop at a
time. Gradients are hand-derived per layer and checked against central
finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import DTYPE, Rng, glorot_uniform_init

LAYER_KINDS = ("conv2d", "maxpool2d", "relu", "flatten", "dense", "softmax", "batchnorm")
ACTIVATIONS = ("relu", "softmax", "none")
PADDINGS = ("same", "valid")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer in a sequential architecture.

    ``batchnorm`` exists for parameter accounting only (4c total, 2c
    trainable); the runtime model builder rejects it.
    """

    kind: str
    filters: int = 0
    kernel_h: int = 0
    kernel_w: int = 0
    padding: str = "valid"
    pool_h: int = 0
    pool_w: int = 0
    units: int = 0
    activation: str = "none"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.kind == "conv2d":
            if self.filters < 1 or self.kernel_h < 1 or self.kernel_w < 1:
                raise ConfigError("conv2d needs filters >= 1 and kernel dims >= 1")
            if self.padding not in PADDINGS:
                raise ConfigError(f"unknown padding {self.padding!r}")
        if self.kind == "maxpool2d" and (self.pool_h < 1 or self.pool_w < 1):
            raise ConfigError("maxpool2d needs window dims >= 1")
        if self.kind == "dense" and self.units < 1:
            raise ConfigError("dense needs units >= 1")


def conv_spec(filters, kh, kw, padding, activation="none") -> LayerSpec:
    return LayerSpec(kind="conv2d", filters=filters, kernel_h=kh, kernel_w=kw,
                     padding=padding, activation=activation)


def pool_spec(h, w) -> LayerSpec:
    return LayerSpec(kind="maxpool2d", pool_h=h, pool_w=w)


def dense_spec(units, activation="none") -> LayerSpec:
    return LayerSpec(kind="dense", units=units, activation=activation)


def flatten_spec() -> LayerSpec:
    return LayerSpec(kind="flatten")


def batchnorm_spec() -> LayerSpec:
    return LayerSpec(kind="batchnorm")


# ---------------------------------------------------------------------------
# shape propagation and parameter accounting


def output_shape(spec: LayerSpec, in_shape: tuple) -> tuple:
    """Shape a layer produces for one sample of ``in_shape`` (no batch dim)."""
    if spec.kind == "conv2d":
        if len(in_shape) != 3:
            raise ConfigError(f"conv2d expects HxWxC input, got {in_shape}")
        h, w, c = in_shape
        if spec.padding == "same":
            return (h, w, spec.filters)
        oh, ow = h - spec.kernel_h + 1, w - spec.kernel_w + 1
        if oh < 1 or ow < 1:
            raise ConfigError(
                f"conv2d kernel {spec.kernel_h}x{spec.kernel_w} does not fit "
                f"{h}x{w} input with valid padding")
        return (oh, ow, spec.filters)
    if spec.kind == "maxpool2d":
        if len(in_shape) != 3:
            raise ConfigError(f"maxpool2d expects HxWxC input, got {in_shape}")
        h, w, c = in_shape
        oh, ow = h // spec.pool_h, w // spec.pool_w
        if oh < 1 or ow < 1:
            raise ConfigError(
                f"maxpool2d window {spec.pool_h}x{spec.pool_w} larger than "
                f"{h}x{w} input")
        return (oh, ow, c)
    if spec.kind == "flatten":
        return (int(np.prod(in_shape)),)
    if spec.kind == "dense":
        if len(in_shape) != 1:
            raise ConfigError(f"dense expects flat input, got {in_shape}")
        return (spec.units,)
    # relu / softmax / batchnorm keep their input shape
    return in_shape


def layer_param_count(spec: LayerSpec, in_shape: tuple) -> tuple[int, int]:
    """(total, trainable) parameter counts for one layer."""
    if spec.kind == "conv2d":
        c_in = in_shape[2]
        n = spec.kernel_h * spec.kernel_w * c_in * spec.filters + spec.filters
        return n, n
    if spec.kind == "dense":
        n = in_shape[0] * spec.units + spec.units
        return n, n
    if spec.kind == "batchnorm":
        c = in_shape[-1]
        return 4 * c, 2 * c
    return 0, 0


def param_count(specs: list[LayerSpec], input_shape: tuple):
    """Per-layer and total (total, trainable) counts for a spec sequence.

    Returns (rows, total, trainable) where each row is
    (layer name, output shape, total params, trainable params).
    """
    rows = []
    shape = tuple(input_shape)
    counters: dict[str, int] = {}
    total = trainable = 0
    for spec in specs:
        idx = counters.get(spec.kind, 0)
        counters[spec.kind] = idx + 1
        in_shape = shape
        try:
            shape = output_shape(spec, shape)
        except ConfigError as e:
            raise ConfigError(f"{spec.kind}_{idx}: {e}") from e
        n_total, n_train = layer_param_count(spec, in_shape)
        rows.append((f"{spec.kind}_{idx}", shape, n_total, n_train))
        total += n_total
        trainable += n_train
    return rows, total, trainable


# ---------------------------------------------------------------------------
# runtime layers


def _same_pad_amounts(size: int, kernel: int) -> tuple[int, int]:
    # deficit split with the extra zero row/col on the bottom/right
    before = (kernel - 1) // 2
    return before, (kernel - 1) - before


def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Stride-1 patches of x (N,H,W,C) as a (N*OH*OW, kh*kw*C) matrix.

    Column order is (kh, kw, c), matching a (kh, kw, c_in, f) kernel
    reshaped to (kh*kw*c_in, f).
    """
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    # windows: (N, OH, OW, C, kh, kw) -> (N, OH, OW, kh, kw, C)
    windows = windows.transpose(0, 1, 2, 4, 5, 3)
    n, oh, ow = windows.shape[:3]
    return np.ascontiguousarray(windows).reshape(n * oh * ow, kh * kw * x.shape[3])


class Conv2D:
    """Stride-1 2-D cross-correlation with bias, NHWC."""

    def __init__(self, spec: LayerSpec, c_in: int, rng: Rng, dtype=DTYPE):
        self.spec = spec
        self.c_in = c_in
        kh, kw, f = spec.kernel_h, spec.kernel_w, spec.filters
        fan_in = kh * kw * c_in
        self.weights = glorot_uniform_init(fan_in, f, rng, shape=(kh, kw, c_in, f),
                                           dtype=dtype)
        self.bias = np.zeros(f, dtype=dtype)
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[3] != self.c_in:
            raise ShapeError(
                f"conv2d expects NxHxWx{self.c_in} input, got {x.shape}")
        kh, kw = self.spec.kernel_h, self.spec.kernel_w
        if self.spec.padding == "same":
            ph = _same_pad_amounts(x.shape[1], kh)
            pw = _same_pad_amounts(x.shape[2], kw)
            xp = np.pad(x, ((0, 0), ph, pw, (0, 0)))
        else:
            if x.shape[1] < kh or x.shape[2] < kw:
                raise ShapeError(
                    f"conv2d kernel {kh}x{kw} does not fit input {x.shape} "
                    "with valid padding")
            xp = x
        n = x.shape[0]
        oh, ow = xp.shape[1] - kh + 1, xp.shape[2] - kw + 1
        cols = _im2col(xp, kh, kw)
        w2d = self.weights.reshape(-1, self.spec.filters)
        out = cols @ w2d + self.bias
        self._cache = (cols, xp.shape, x.shape)
        return out.reshape(n, oh, ow, self.spec.filters)

    def backward(self, grad_out: np.ndarray):
        """Returns grad_input; stores grad_weights / grad_bias on self."""
        cols, padded_shape, in_shape = self._cache
        kh, kw, f = self.spec.kernel_h, self.spec.kernel_w, self.spec.filters
        n, oh, ow = grad_out.shape[0], grad_out.shape[1], grad_out.shape[2]
        if grad_out.shape != (n, oh, ow, f) or n * oh * ow != cols.shape[0]:
            raise ShapeError(f"conv2d backward: grad shape {grad_out.shape} "
                             "does not match cached forward output")
        g2d = grad_out.reshape(n * oh * ow, f)
        self.grad_weights = (cols.T @ g2d).reshape(self.weights.shape)
        self.grad_bias = g2d.sum(axis=0)
        # scatter column gradients back onto the (padded) input
        gcols = (g2d @ self.weights.reshape(-1, f).T).reshape(
            n, oh, ow, kh, kw, self.c_in)
        gpad = np.zeros(padded_shape, dtype=grad_out.dtype)
        for i in range(kh):
            for j in range(kw):
                gpad[:, i:i + oh, j:j + ow, :] += gcols[:, :, :, i, j, :]
        if self.spec.padding == "same":
            ph = _same_pad_amounts(in_shape[1], kh)
            pw = _same_pad_amounts(in_shape[2], kw)
            return gpad[:, ph[0]:ph[0] + in_shape[1], pw[0]:pw[0] + in_shape[2], :]
        return gpad

    def params(self):
        return [("weight", "weights"), ("bias", "bias")]


class MaxPool2D:
    """Window-strided max pooling; odd trailing rows/columns are dropped."""

    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        ph, pw = self.spec.pool_h, self.spec.pool_w
        if x.ndim != 4 or x.shape[1] < ph or x.shape[2] < pw:
            raise ShapeError(
                f"maxpool2d window {ph}x{pw} does not fit input {x.shape}")
        n, h, w, c = x.shape
        oh, ow = h // ph, w // pw
        cropped = x[:, :oh * ph, :ow * pw, :]
        # windows flattened in row-major scan order so argmax ties go to the
        # first position, which is where backward routes the gradient
        windows = cropped.reshape(n, oh, ph, ow, pw, c).transpose(0, 1, 3, 2, 4, 5)
        windows = np.ascontiguousarray(windows).reshape(n, oh, ow, ph * pw, c)
        argmax = windows.argmax(axis=3)
        out = np.take_along_axis(windows, argmax[:, :, :, None, :], axis=3)
        self._cache = (argmax, x.shape)
        return out[:, :, :, 0, :]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        argmax, in_shape = self._cache
        ph, pw = self.spec.pool_h, self.spec.pool_w
        n, h, w, c = in_shape
        oh, ow = h // ph, w // pw
        if grad_out.shape != (n, oh, ow, c):
            raise ShapeError(f"maxpool2d backward: grad shape {grad_out.shape} "
                             f"does not match output {(n, oh, ow, c)}")
        flat = np.zeros((n, oh, ow, ph * pw, c), dtype=grad_out.dtype)
        np.put_along_axis(flat, argmax[:, :, :, None, :],
                          grad_out[:, :, :, None, :], axis=3)
        grad = flat.reshape(n, oh, ow, ph, pw, c).transpose(0, 1, 3, 2, 4, 5)
        grad = grad.reshape(n, oh * ph, ow * pw, c)
        if (oh * ph, ow * pw) != (h, w):
            full = np.zeros(in_shape, dtype=grad_out.dtype)
            full[:, :oh * ph, :ow * pw, :] = grad
            return full
        return grad

    def params(self):
        return []


class ReLU:
    """max(0, x); the subgradient at exactly 0 is 0."""

    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out * self._mask

    def params(self):
        return []


class Flatten:
    def __init__(self):
        self._shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out.reshape(self._shape)

    def params(self):
        return []


class Dense:
    """x @ W + b on flat (N, D) input."""

    def __init__(self, spec: LayerSpec, d_in: int, rng: Rng, dtype=DTYPE):
        self.spec = spec
        self.d_in = d_in
        self.weights = glorot_uniform_init(d_in, spec.units, rng, dtype=dtype)
        self.bias = np.zeros(spec.units, dtype=dtype)
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(f"dense expects Nx{self.d_in} input, got {x.shape}")
        self._cache = x
        return x @ self.weights + self.bias

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache
        if grad_out.shape != (x.shape[0], self.spec.units):
            raise ShapeError(f"dense backward: grad shape {grad_out.shape} does "
                             f"not match output {(x.shape[0], self.spec.units)}")
        self.grad_weights = x.T @ grad_out
        self.grad_bias = grad_out.sum(axis=0)
        return grad_out @ self.weights.T

    def params(self):
        return [("weight", "weights"), ("bias", "bias")]


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction, stable for all finite input."""
    z = np.asarray(z)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)
