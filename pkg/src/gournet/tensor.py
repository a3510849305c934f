"""Dense tensor primitives and the deterministic random number generator.

Tensors are plain numpy arrays: float32, C (row-major) order everywhere in
training and inference. Gradient-check tests run the same code in float64;
pass ``dtype=np.float64`` to the constructors that take one.

The PRNG is splitmix64 (Steele, Lea & Flood's SplittableRandom finalizer).
It is documented, platform independent, and trivially vectorized with
uint64 numpy arithmetic, so identical seeds produce identical streams on
every machine. Changing the algorithm would invalidate recorded runs and
requires a checkpoint format version bump.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError

DTYPE = np.float32

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    """splitmix64 output function on a plain Python int."""
    z = z & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps mod 2**64, which is exactly what we want
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Deterministic splitmix64 stream.

    A stream is (seed, counter): draw number n is mix64(seed + n * gamma).
    ``derive`` folds extra integer tokens into the seed to produce an
    independent child stream, so sub-streams for (seed, epoch) or
    (seed, sample index) are reproducible without sharing state.
    Instances are single-owner; do not share one across threads.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._count = 0

    def derive(self, *tokens: int) -> "Rng":
        """Child stream keyed by (seed, *tokens). Does not advance self."""
        s = self.seed
        for t in tokens:
            s = _mix64((s ^ _mix64((t + _GAMMA) & _MASK64)) + _GAMMA)
        child = Rng(0)
        child.seed = s
        return child

    def next_raw(self, n: int) -> np.ndarray:
        """Next n raw 64-bit draws as a uint64 array."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        states = np.uint64(self.seed) + idx * np.uint64(_GAMMA)
        return _mix64_array(states)

    def uniform(self, shape, low: float = 0.0, high: float = 1.0,
                dtype=DTYPE) -> np.ndarray:
        """i.i.d. uniform draws on [low, high) with the given shape."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        # 53 high bits -> float64 in [0, 1), the standard conversion
        u = (self.next_raw(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
        out = low + (high - low) * u
        return out.reshape(shape).astype(dtype)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) (argsort of random keys)."""
        keys = self.next_raw(n)
        return np.argsort(keys, kind="stable")

    def choice_mask(self, n: int, prob: float) -> np.ndarray:
        """n independent Bernoulli(prob) draws."""
        return self.uniform(n, dtype=np.float64) < prob


def as_tensor(values, dtype=DTYPE) -> np.ndarray:
    """Materialize values as a row-major array of the engine dtype."""
    return np.ascontiguousarray(values, dtype=dtype)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of a [MxK] and b [KxN]."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")
    return a @ b


def glorot_uniform_init(fan_in: int, fan_out: int, rng: Rng, shape=None,
                        dtype=DTYPE) -> np.ndarray:
    """Uniform draws on [-L, L], L = sqrt(6 / (fan_in + fan_out)).

    ``shape`` defaults to (fan_in, fan_out); conv kernels pass their own.
    """
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"fans must be >= 1, got fan_in={fan_in} fan_out={fan_out}")
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(shape, -limit, limit, dtype=dtype)


def _check_same_shape(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def add(a, b):
    _check_same_shape(a, b, "add")
    return a + b


def sub(a, b):
    _check_same_shape(a, b, "sub")
    return a - b


def mul(a, b):
    _check_same_shape(a, b, "mul")
    return a * b


def scale(a, s: float):
    """Multiply by a scalar (the one broadcast the engine permits)."""
    return a * a.dtype.type(s)


def exp(a):
    return np.exp(a)


def log(a):
    if np.any(a <= 0):
        raise DomainError("log of non-positive value")
    return np.log(a)


def maximum(a, b):
    _check_same_shape(a, b, "max")
    return np.maximum(a, b)
