"""Model assembly, parameter naming, and end-to-end plumbing."""

import numpy as np
import numpy.testing as npt
import pytest

from gournet.config import parse_config
from gournet.errors import ConfigError
from gournet.layers import (conv_spec, dense_spec, flatten_spec, pool_spec,
                            batchnorm_spec)
from gournet.model import SequentialModel, build_model, validate_specs
from gournet.tensor import Rng

SPECS = [conv_spec(4, 3, 3, "same", activation="relu"), pool_spec(2, 2),
         flatten_spec(), dense_spec(6, activation="relu"),
         dense_spec(3, activation="softmax")]


def small_model(seed=1, dtype=np.float32):
    return build_model((6, 6, 1), SPECS, Rng(seed), dtype=dtype)


def test_build_model_forward_shapes():
    model = small_model()
    x = Rng(2).uniform((5, 6, 6, 1))
    logits = model.forward(x)
    assert logits.shape == (5, 3)
    probs = model.predict_proba(x)
    npt.assert_allclose(probs.sum(axis=1), np.ones(5), atol=1e-5)


def test_parameter_names_follow_kind_counters():
    model = small_model()
    names = [name for name, _ in model.parameters()]
    assert names == ["conv0.weight", "conv0.bias", "dense0.weight",
                     "dense0.bias", "dense1.weight", "dense1.bias"]
    assert model.num_params() == sum(p.size for _, p in model.parameters())


def test_num_params_agrees_with_audit():
    from gournet.config import audit, ModelConfig

    model = small_model()
    report = audit(ModelConfig((6, 6, 1), tuple(SPECS)))
    assert model.num_params() == report.trainable


def test_gradients_align_with_parameters():
    model = small_model()
    x = Rng(3).uniform((4, 6, 6, 1))
    logits = model.forward(x)
    grad = np.ones_like(logits) / logits.size
    model.backward(grad)
    grads = dict(model.gradients())
    for name, p in model.parameters():
        assert grads[name].shape == p.shape


def test_snapshot_restore_round_trip():
    model = small_model()
    snap = model.snapshot()
    for _, p in model.parameters():
        p += 1.0
    assert not np.array_equal(dict(model.parameters())["conv0.bias"],
                              snap["conv0.bias"])
    model.restore(snap)
    for name, p in model.parameters():
        npt.assert_array_equal(p, snap[name])
    # the snapshot must be a copy, not a view
    snap["conv0.bias"] += 5.0
    assert not np.array_equal(dict(model.parameters())["conv0.bias"],
                              snap["conv0.bias"])


def test_set_parameter_validates_shape_and_name():
    model = small_model()
    with pytest.raises(KeyError):
        model.set_parameter("dense9.weight", np.zeros((1, 1)))
    from gournet.errors import ShapeError
    with pytest.raises(ShapeError):
        model.set_parameter("dense0.bias", np.zeros(99, dtype=np.float32))


def test_build_model_deterministic_in_seed():
    m1, m2 = small_model(seed=4), small_model(seed=4)
    for (_, p1), (_, p2) in zip(m1.parameters(), m2.parameters()):
        npt.assert_array_equal(p1, p2)
    m3 = small_model(seed=5)
    assert any(not np.array_equal(p1, p3)
               for (_, p1), (_, p3) in zip(m1.parameters(), m3.parameters()))


def test_validate_specs_rejects_bad_heads():
    with pytest.raises(ConfigError):
        validate_specs([flatten_spec(), dense_spec(4, activation="relu")],
                       (4, 4, 1))
    with pytest.raises(ConfigError):
        validate_specs([dense_spec(4, activation="softmax"),
                        flatten_spec()], (4, 4, 1))
    with pytest.raises(ConfigError):
        validate_specs([flatten_spec(),
                        dense_spec(4, activation="softmax"),
                        dense_spec(2, activation="softmax")], (4, 4, 1))


def test_build_model_rejects_batchnorm():
    specs = [conv_spec(2, 3, 3, "same", activation="relu"),
             batchnorm_spec(), flatten_spec(),
             dense_spec(2, activation="softmax")]
    with pytest.raises(ConfigError):
        build_model((4, 4, 1), specs, Rng(1))


def test_forward_then_backward_requires_forward_first():
    model = small_model()
    with pytest.raises(Exception):
        model.backward(np.ones((2, 3), dtype=np.float32))


def test_model_from_parsed_config_trains_shape_compatible():
    cfg = parse_config("input 8 8 3\nconv 4 3 3 valid relu\nmaxpool 2 2\n"
                       "flatten\ndense 5 softmax\n")
    model = build_model(cfg.input_shape, list(cfg.specs), Rng(0))
    out = model.forward(np.zeros((2, 8, 8, 3), dtype=np.float32))
    assert out.shape == (2, 5)
