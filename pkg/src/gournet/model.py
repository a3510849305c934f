"""Sequential model assembly over the runtime layers.

The final dense layer's softmax is applied outside the layer stack:
training consumes raw logits through the fused softmax/cross-entropy
gradient, and inference applies ``softmax`` explicitly. Batch-norm specs
are accounting-only and cannot be assembled into a runtime model.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ShapeError
from .layers import (Conv2D, Dense, Flatten, LayerSpec, MaxPool2D, ReLU,
                     output_shape, softmax)
from .tensor import DTYPE, Rng


class SequentialModel:
    """Ordered layer stack with hand-derived backward passes.

    One instance serves one training loop at a time (layers cache forward
    activations). Parameters are named ``<kind><i>.<weight|bias>`` with a
    per-kind counter, the naming the checkpoint format stores.
    """

    def __init__(self, input_shape: tuple, layers: list, specs: list[LayerSpec]):
        self.input_shape = tuple(input_shape)
        self.layers = layers
        self.specs = specs
        self._param_refs = []
        counters: dict[str, int] = {}
        for layer in layers:
            kind = type(layer).__name__.lower().replace("2d", "")
            if layer.params():
                idx = counters.get(kind, 0)
                counters[kind] = idx + 1
                for public, attr in layer.params():
                    self._param_refs.append((f"{kind}{idx}.{public}", layer, attr))

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for a batch (N, H, W, C)."""
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad_logits: np.ndarray) -> np.ndarray:
        """Propagate d(loss)/d(logits); leaves grads on each layer."""
        g = grad_logits
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x))

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(layer, attr)) for name, layer, attr in self._param_refs]

    def gradients(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(layer, "grad_" + attr))
                for name, layer, attr in self._param_refs]

    def set_parameter(self, name: str, value: np.ndarray) -> None:
        for pname, layer, attr in self._param_refs:
            if pname == name:
                current = getattr(layer, attr)
                if value.shape != current.shape:
                    raise ShapeError(
                        f"{name}: expected shape {current.shape}, "
                        f"got {value.shape}")
                setattr(layer, attr, value.astype(current.dtype, copy=False))
                return
        raise KeyError(name)

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.parameters()}

    def restore(self, weights: dict[str, np.ndarray]) -> None:
        for name, value in weights.items():
            self.set_parameter(name, value.copy())

    def num_params(self) -> int:
        return sum(v.size for _, v in self.parameters())


def validate_specs(specs: list[LayerSpec], input_shape: tuple) -> tuple:
    """Shape-check a spec sequence end to end; returns the output shape."""
    shape = tuple(input_shape)
    for i, spec in enumerate(specs):
        try:
            shape = output_shape(spec, shape)
        except ConfigError as e:
            raise ConfigError(f"layer {i} ({spec.kind}): {e}") from e
    if not specs or specs[-1].kind != "dense" or specs[-1].activation != "softmax":
        raise ConfigError("model must end with a softmax dense head")
    for i, spec in enumerate(specs):
        if spec.activation == "softmax" and i != len(specs) - 1:
            raise ConfigError(f"layer {i}: softmax permitted only on the final layer")
    return shape


def build_model(input_shape: tuple, specs: list[LayerSpec], rng: Rng,
                dtype=DTYPE) -> SequentialModel:
    """Assemble a runtime model; initialization order is layer order."""
    validate_specs(specs, input_shape)
    layers = []
    shape = tuple(input_shape)
    for i, spec in enumerate(specs):
        if spec.kind == "conv2d":
            layers.append(Conv2D(spec, c_in=shape[2], rng=rng, dtype=dtype))
        elif spec.kind == "maxpool2d":
            layers.append(MaxPool2D(spec))
        elif spec.kind == "relu":
            layers.append(ReLU())
        elif spec.kind == "flatten":
            layers.append(Flatten())
        elif spec.kind == "dense":
            layers.append(Dense(spec, d_in=shape[0], rng=rng, dtype=dtype))
        elif spec.kind == "batchnorm":
            raise ConfigError("batchnorm is accounting-only and cannot be "
                              "assembled into a runtime model")
        else:
            raise ConfigError(f"cannot assemble layer kind {spec.kind!r}")
        shape = output_shape(spec, shape)
        # conv/dense activations become their own layers; the final softmax
        # is deferred to predict_proba / the fused loss gradient
        if spec.activation == "relu":
            layers.append(ReLU())
    return SequentialModel(input_shape, layers, specs)
