"""Architecture config parsing, parameter auditing, and target-count search.

Config files are line based::

    # comment
    input 224 224 3
    conv 32 3 3 valid relu
    maxpool 2 2
    flatten
    dense 64 relu
    dense 8 softmax

Keywords: input, conv (F KH KW PAD ACT), maxpool (H W), flatten,
dense (U ACT), and batchnorm (a parameter-accounting entry used by audit
configs; it cannot be assembled into a runtime model).

``solve_config`` enumerates a constrained family of conv/pool stacks and
returns every member whose total parameter count equals a target, so a
reference architecture can be recovered from its published size instead
of guessed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .layers import (LayerSpec, batchnorm_spec, conv_spec, dense_spec,
                     flatten_spec, param_count, pool_spec)
from .model import validate_specs


@dataclass(frozen=True)
class ModelConfig:
    input_shape: tuple[int, int, int]   # (H, W, C)
    specs: tuple[LayerSpec, ...]

    @property
    def runnable(self) -> bool:
        return all(s.kind != "batchnorm" for s in self.specs)


@dataclass(frozen=True)
class ParamReport:
    rows: tuple[tuple[str, tuple, int, int], ...]  # name, out shape, total, trainable
    total: int
    trainable: int

    def render(self) -> str:
        lines = [f"{'layer':<16} {'output shape':<20} {'params':>12} {'trainable':>12}"]
        lines.append("-" * len(lines[0]))
        for name, shape, n_total, n_train in self.rows:
            shape_s = "(" + ", ".join(str(d) for d in shape) + ")"
            lines.append(f"{name:<16} {shape_s:<20} {n_total:>12,} {n_train:>12,}")
        lines.append("-" * len(lines[0]))
        lines.append(f"total/trainable: {self.total:,}/{self.trainable:,}")
        return "\n".join(lines)


def _parse_int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"malformed {what} {token!r}", line=lineno) from None


def parse_config(text: str) -> ModelConfig:
    """Parse and shape-validate a config; errors carry the line number."""
    input_shape = None
    specs: list[LayerSpec] = []
    seen_any = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword, args = tokens[0], tokens[1:]
        if not seen_any and keyword != "input":
            raise ConfigError("config must start with an input line", line=lineno)
        seen_any = True
        try:
            if keyword == "input":
                if input_shape is not None:
                    raise ConfigError("duplicate input line", line=lineno)
                if len(args) != 3:
                    raise ConfigError("input needs H W C", line=lineno)
                h, w, c = (_parse_int(a, "input dim", lineno) for a in args)
                if h < 1 or w < 1 or c < 1:
                    raise ConfigError("input dims must be >= 1", line=lineno)
                input_shape = (h, w, c)
            elif keyword == "conv":
                if len(args) != 5:
                    raise ConfigError("conv needs F KH KW PAD ACT", line=lineno)
                f = _parse_int(args[0], "filter count", lineno)
                kh = _parse_int(args[1], "kernel height", lineno)
                kw = _parse_int(args[2], "kernel width", lineno)
                specs.append(conv_spec(f, kh, kw, args[3], activation=args[4]))
            elif keyword == "maxpool":
                if len(args) != 2:
                    raise ConfigError("maxpool needs H W", line=lineno)
                specs.append(pool_spec(_parse_int(args[0], "window height", lineno),
                                       _parse_int(args[1], "window width", lineno)))
            elif keyword == "flatten":
                if args:
                    raise ConfigError("flatten takes no arguments", line=lineno)
                specs.append(flatten_spec())
            elif keyword == "dense":
                if len(args) != 2:
                    raise ConfigError("dense needs U ACT", line=lineno)
                specs.append(dense_spec(_parse_int(args[0], "unit count", lineno),
                                        activation=args[1]))
            elif keyword == "batchnorm":
                if args:
                    raise ConfigError("batchnorm takes no arguments", line=lineno)
                specs.append(batchnorm_spec())
            else:
                raise ConfigError(f"unknown keyword {keyword!r}", line=lineno)
        except ConfigError as e:
            if e.line is None:
                raise ConfigError(str(e), line=lineno) from None
            raise
    if input_shape is None:
        raise ConfigError("config must start with an input line", line=1)
    validate_specs(specs, input_shape)
    return ModelConfig(input_shape, tuple(specs))


def config_to_text(config: ModelConfig) -> str:
    """Canonical config text; parse_config(config_to_text(c)) == c."""
    h, w, c = config.input_shape
    lines = [f"input {h} {w} {c}"]
    for s in config.specs:
        if s.kind == "conv2d":
            lines.append(f"conv {s.filters} {s.kernel_h} {s.kernel_w} "
                         f"{s.padding} {s.activation}")
        elif s.kind == "maxpool2d":
            lines.append(f"maxpool {s.pool_h} {s.pool_w}")
        elif s.kind == "flatten":
            lines.append("flatten")
        elif s.kind == "dense":
            lines.append(f"dense {s.units} {s.activation}")
        elif s.kind == "batchnorm":
            lines.append("batchnorm")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ModelConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_config(f.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def bundled_config_text(name: str) -> str:
    """Text of a config shipped with the package (e.g. 'gournet.cfg')."""
    ref = resources.files(__package__).joinpath("configs", name)
    if not ref.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return ref.read_text(encoding="utf-8")


def audit(config: ModelConfig) -> ParamReport:
    """Per-layer output shapes and parameter counts plus totals."""
    rows, total, trainable = param_count(list(config.specs), config.input_shape)
    return ParamReport(tuple(rows), total, trainable)


# ---------------------------------------------------------------------------
# constrained architecture search


@dataclass(frozen=True)
class SolveConstraints:
    """The searched family: ``blocks`` conv+pool pairs (first conv fixed),
    a hidden dense layer, and a softmax head."""

    input_shape: tuple[int, int, int] = (224, 224, 3)
    first_filters: int = 32
    kernel: int = 3
    min_blocks: int = 2
    max_blocks: int = 6
    filter_choices: tuple[int, ...] = (16, 32, 64, 128, 256)
    dense_min: int = 1
    dense_max: int = 4096
    head_units: int = 8


@dataclass(frozen=True)
class SolveResult:
    target: int
    candidates_examined: int
    configs: tuple[ModelConfig, ...]

    def log(self) -> str:
        lines = [f"target {self.target}: examined {self.candidates_examined} "
                 f"family candidates, found {len(self.configs)} match(es)"]
        for cfg in self.configs:
            convs = [s for s in cfg.specs if s.kind == "conv2d"]
            dense = [s for s in cfg.specs if s.kind == "dense"]
            filters = ",".join(str(s.filters) for s in convs)
            lines.append(f"  blocks={len(convs)} padding={convs[0].padding} "
                         f"filters=[{filters}] dense={dense[0].units}")
        if not self.configs:
            lines.append("  search completed: no family member has this count")
        return "\n".join(lines)


def _family_config(cons: SolveConstraints, filters: tuple[int, ...],
                   padding: str, dense_units: int) -> ModelConfig:
    specs: list[LayerSpec] = []
    for f in filters:
        specs.append(conv_spec(f, cons.kernel, cons.kernel, padding,
                               activation="relu"))
        specs.append(pool_spec(2, 2))
    specs.append(flatten_spec())
    specs.append(dense_spec(dense_units, activation="relu"))
    specs.append(dense_spec(cons.head_units, activation="softmax"))
    return ModelConfig(cons.input_shape, tuple(specs))


def solve_config(target_total: int,
                 cons: SolveConstraints = SolveConstraints()) -> SolveResult:
    """Exhaustively enumerate the family; return every member whose total
    parameter count equals the target.

    The dense width is solved in closed form per conv stack: with S conv
    parameters and D flattened features, total = S + U*(D + 9) + 8 for a
    head of 8 (generally U*(D + head + 1) + head), so U must divide
    exactly. Results are ordered fewest blocks first, then lexicographic
    filters, then padding.
    """
    k = cons.kernel
    head = cons.head_units
    found = []
    examined = 0
    for nblocks in range(cons.min_blocks, cons.max_blocks + 1):
        for rest in itertools.product(cons.filter_choices, repeat=nblocks - 1):
            filters = (cons.first_filters,) + rest
            for padding in ("same", "valid"):
                examined += 1
                h, w = cons.input_shape[:2]
                c_in = cons.input_shape[2]
                conv_params = 0
                valid_shape = True
                for f in filters:
                    if padding == "valid":
                        h, w = h - k + 1, w - k + 1
                    conv_params += k * k * c_in * f + f
                    c_in = f
                    if h < 2 or w < 2:
                        valid_shape = False
                        break
                    h, w = h // 2, w // 2
                if not valid_shape or h < 1 or w < 1:
                    continue
                flat = h * w * filters[-1]
                remainder = target_total - head - conv_params
                denom = flat + head + 1
                if remainder <= 0 or remainder % denom:
                    continue
                units = remainder // denom
                if cons.dense_min <= units <= cons.dense_max:
                    found.append((nblocks, filters, padding,
                                  _family_config(cons, filters, padding, units)))
    found.sort(key=lambda t: (t[0], t[1], t[2]))
    return SolveResult(target_total, examined, tuple(t[3] for t in found))
