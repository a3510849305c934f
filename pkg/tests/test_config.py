"""Config grammar, parameter audit goldens, and the family solver.

The audit goldens are hand-computed from the counting formulas
(kh*kw*cin*f + f per conv, d*u + u per dense, 4c per batchnorm with 2c
trainable); the solver is validated by round-tripping constructed family
members through count-then-search.
"""

import numpy as np
import pytest

from gournet.config import (ModelConfig, SolveConstraints, audit,
                            bundled_config_text, config_to_text, load_config,
                            parse_config, solve_config)
from gournet.errors import ConfigError
from gournet.layers import conv_spec, dense_spec, flatten_spec, pool_spec
from gournet.tensor import Rng

TINY = """\
input 8 8 1
conv 8 3 3 valid relu
maxpool 2 2
flatten
dense 4 softmax
"""


# ------------------------------------------------------------------ parse

def test_parse_minimal_config():
    cfg = parse_config(TINY)
    assert cfg.input_shape == (8, 8, 1)
    assert [s.kind for s in cfg.specs] == ["conv2d", "maxpool2d", "flatten",
                                           "dense"]
    assert cfg.runnable


def test_parse_strips_comments_and_blank_lines():
    text = "# top comment\n\ninput 8 8 1  # trailing\n" + \
        "conv 8 3 3 valid relu\nmaxpool 2 2\nflatten\ndense 4 softmax\n"
    assert parse_config(text) == parse_config(TINY)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("input 8 8 1\nconv 8 3 3 valid relu\nwibble 1\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("input 8 8 1\nconv 8 3 valid relu\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("input 8 8 1\ninput 4 4 1\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("conv 8 3 3 valid relu\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("input 8 8 1\nconv eight 3 3 valid relu\n")


def test_parse_requires_input_line():
    with pytest.raises(ConfigError):
        parse_config("# nothing but comments\n")


def test_parse_validates_end_to_end_shapes():
    # pooling collapses to zero height -> rejected at parse time
    bad = "input 4 4 1\nmaxpool 2 2\nmaxpool 2 2\nmaxpool 2 2\n" \
        "flatten\ndense 2 softmax\n"
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_parse_requires_softmax_head():
    with pytest.raises(ConfigError):
        parse_config("input 8 8 1\nflatten\ndense 4 relu\n")
    with pytest.raises(ConfigError):
        parse_config("input 8 8 1\nconv 4 3 3 valid softmax\nflatten\n"
                     "dense 4 softmax\n")


def test_round_trip_through_text():
    for name in ("gournet.cfg", "vgg16-8.cfg", "alexnet-bn-8.cfg",
                 "gournet-64.cfg"):
        cfg = parse_config(bundled_config_text(name))
        assert parse_config(config_to_text(cfg)) == cfg


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.cfg"))


def test_bundled_config_unknown_name():
    with pytest.raises(ConfigError):
        bundled_config_text("bogus.cfg")


# ------------------------------------------------------------------ audit

def test_audit_tiny_config_hand_count():
    report = audit(parse_config(TINY))
    # conv 3*3*1*8+8 = 80; dense (3*3*8)*4+4 = 292
    assert report.total == report.trainable == 372
    assert report.render().endswith("total/trainable: 372/372")


def test_audit_gournet_golden():
    report = audit(parse_config(bundled_config_text("gournet.cfg")))
    assert (report.total, report.trainable) == (683_656, 683_656)


def test_audit_vgg16_golden():
    report = audit(parse_config(bundled_config_text("vgg16-8.cfg")))
    assert (report.total, report.trainable) == (134_293_320, 134_293_320)


def test_audit_alexnet_bn_golden():
    report = audit(parse_config(bundled_config_text("alexnet-bn-8.cfg")))
    assert (report.total, report.trainable) == (58_319_624, 58_316_872)
    assert report.total - report.trainable == 2 * (96 + 256 + 384 + 384 + 256)


def test_batchnorm_configs_parse_but_are_not_runnable():
    cfg = parse_config(bundled_config_text("alexnet-bn-8.cfg"))
    assert not cfg.runnable


def test_audit_render_has_one_row_per_layer():
    report = audit(parse_config(TINY))
    assert len(report.rows) == 4
    text = report.render()
    for token in ("conv2d_0", "maxpool2d_0", "flatten_0", "dense_0"):
        assert token in text


# ----------------------------------------------------------------- solver

def _family_member(rng, cons):
    """A random member of the searched family, built layer by layer."""
    nblocks = 2 + int(rng.uniform(1)[0] * (cons.max_blocks - 2 + 1e-12))
    filters = [cons.first_filters]
    for _ in range(nblocks - 1):
        pick = int(rng.uniform(1)[0] * len(cons.filter_choices))
        filters.append(cons.filter_choices[min(pick,
                                               len(cons.filter_choices) - 1)])
    padding = "same" if rng.uniform(1)[0] < 0.5 else "valid"
    units = 1 + int(rng.uniform(1)[0] * 512)
    specs = []
    for f in filters:
        specs.append(conv_spec(f, 3, 3, padding, activation="relu"))
        specs.append(pool_spec(2, 2))
    specs.append(flatten_spec())
    specs.append(dense_spec(units, activation="relu"))
    specs.append(dense_spec(cons.head_units, activation="softmax"))
    return ModelConfig(cons.input_shape, tuple(specs))


def _solver_fingerprint(cfg):
    convs = tuple(s.filters for s in cfg.specs if s.kind == "conv2d")
    dense = [s.units for s in cfg.specs if s.kind == "dense"]
    padding = next(s.padding for s in cfg.specs if s.kind == "conv2d")
    return convs, padding, dense[0]


def test_solver_round_trip_membership():
    cons = SolveConstraints()
    rng = Rng(2024)
    for _ in range(25):
        member = _family_member(rng, cons)
        target = audit(member).total
        result = solve_config(target, cons)
        assert _solver_fingerprint(member) in \
            {_solver_fingerprint(c) for c in result.configs}, \
            f"solver missed a constructed member with total {target}"


def test_solver_results_all_audit_to_target():
    result = solve_config(683_656)
    assert result.configs
    for cfg in result.configs:
        assert audit(cfg).total == 683_656


def test_solver_first_result_is_shipped_architecture():
    result = solve_config(683_656)
    first = result.configs[0]
    assert config_to_text(first) == config_to_text(
        parse_config(bundled_config_text("gournet.cfg")))


def test_solver_orders_by_block_count():
    result = solve_config(683_656)
    nblocks = [sum(1 for s in c.specs if s.kind == "conv2d")
               for c in result.configs]
    assert nblocks == sorted(nblocks)


def test_solver_impossible_target_reports_completed_search():
    result = solve_config(7)
    assert result.configs == ()
    assert result.candidates_examined > 0
    assert "search completed" in result.log()


def test_solver_log_lists_matches():
    log = solve_config(683_656).log()
    assert "found 22 match(es)" in log
    assert "blocks=4 padding=valid filters=[32,64,64,64] dense=64" in log
