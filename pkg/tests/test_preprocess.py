"""Resize/flip/rotate/augment against per-pixel references.

The bilinear reference below maps output pixel centers to input
coordinates with the half-pixel convention ((i + 0.5) * scale - 0.5),
clamps to the edges, and interpolates one pixel at a time.
"""

import numpy as np
import numpy.testing as npt
import pytest

from gournet.data import STREAM_AUGMENT
from gournet.preprocess import (AugmentPolicy, NO_AUGMENT, augment,
                                flip_horizontal, flip_vertical, rescale,
                                resize_bilinear, rotate)
from gournet.tensor import Rng


def bilinear_reference(img, out_h, out_w):
    in_h, in_w, c = img.shape
    out = np.zeros((out_h, out_w, c), dtype=np.float64)
    for oi in range(out_h):
        for oj in range(out_w):
            sy = (oi + 0.5) * in_h / out_h - 0.5
            sx = (oj + 0.5) * in_w / out_w - 0.5
            y0 = int(np.floor(sy))
            x0 = int(np.floor(sx))
            fy, fx = sy - y0, sx - x0
            y0c, y1c = np.clip([y0, y0 + 1], 0, in_h - 1)
            x0c, x1c = np.clip([x0, x0 + 1], 0, in_w - 1)
            top = (1 - fx) * img[y0c, x0c] + fx * img[y0c, x1c]
            bot = (1 - fx) * img[y1c, x0c] + fx * img[y1c, x1c]
            out[oi, oj] = (1 - fy) * top + fy * bot
    return out


def test_resize_matches_reference_downscale():
    rng = Rng(71)
    img = rng.uniform((9, 13, 3), 0, 255, dtype=np.float64)
    npt.assert_allclose(resize_bilinear(img, 5, 7),
                        bilinear_reference(img, 5, 7), rtol=1e-10)


def test_resize_matches_reference_upscale():
    rng = Rng(72)
    img = rng.uniform((4, 6, 2), 0, 1, dtype=np.float64)
    npt.assert_allclose(resize_bilinear(img, 11, 8),
                        bilinear_reference(img, 11, 8), rtol=1e-10)


def test_resize_identity_when_size_unchanged():
    rng = Rng(73)
    img = rng.uniform((6, 6, 3), 0, 1, dtype=np.float64)
    npt.assert_allclose(resize_bilinear(img, 6, 6), img, atol=1e-12)


def test_resize_constant_image_stays_constant():
    img = np.full((10, 10, 3), 7.5)
    out = resize_bilinear(img, 3, 17)
    npt.assert_allclose(out, 7.5, atol=1e-12)


def test_resize_preserves_value_range():
    rng = Rng(74)
    img = rng.uniform((16, 16, 3), 0, 255, dtype=np.float64)
    out = resize_bilinear(img, 7, 7)
    assert out.min() >= img.min() - 1e-9
    assert out.max() <= img.max() + 1e-9


def test_resize_rejects_bad_target():
    with pytest.raises(ValueError):
        resize_bilinear(np.zeros((4, 4, 3)), 0, 4)


def test_rescale_divides_by_255_and_casts():
    img = np.array([[[0, 127.5, 255]]])
    out = rescale(img)
    assert out.dtype == np.float32
    npt.assert_allclose(out, [[[0.0, 0.5, 1.0]]], rtol=1e-6)


def test_flips_are_involutions_and_move_corners():
    rng = Rng(75)
    img = rng.uniform((5, 7, 3), 0, 1, dtype=np.float64)
    npt.assert_array_equal(flip_horizontal(flip_horizontal(img)), img)
    npt.assert_array_equal(flip_vertical(flip_vertical(img)), img)
    npt.assert_array_equal(flip_horizontal(img)[:, 0], img[:, -1])
    npt.assert_array_equal(flip_vertical(img)[0], img[-1])


def test_rotate_quarter_turn_matches_rot90_on_squares():
    rng = Rng(76)
    img = rng.uniform((8, 8, 3), 0, 1, dtype=np.float64)
    npt.assert_allclose(rotate(img, 0.25), np.rot90(img, 1), atol=1e-9)
    npt.assert_allclose(rotate(img, -0.25), np.rot90(img, -1), atol=1e-9)


def test_rotate_half_turn_matches_rot90_any_shape():
    rng = Rng(77)
    img = rng.uniform((5, 9, 2), 0, 1, dtype=np.float64)
    npt.assert_allclose(rotate(img, 0.5), np.rot90(img, 2), atol=1e-9)


def test_rotate_zero_is_identity():
    rng = Rng(78)
    img = rng.uniform((6, 6, 1), 0, 1, dtype=np.float64)
    npt.assert_allclose(rotate(img, 0.0), img, atol=1e-12)


def test_rotate_eighth_turn_zero_fills_corners():
    img = np.ones((16, 16, 1))
    out = rotate(img, 0.125)   # 45 degrees: corners leave the canvas
    assert out[0, 0, 0] == 0.0 and out[0, -1, 0] == 0.0
    assert out[8, 8, 0] > 0.9  # center survives
    assert out.min() >= 0.0 and out.max() <= 1.0 + 1e-9


def test_rotate_requires_hwc():
    with pytest.raises(ValueError):
        rotate(np.zeros((4, 4)), 0.1)


# ---------------------------------------------------------------- augment

def test_augment_consumes_exactly_three_draws():
    policy = AugmentPolicy()
    img = Rng(1).uniform((6, 6, 3), 0, 1, dtype=np.float64)
    a = Rng(42).derive(STREAM_AUGMENT, 1)
    b = Rng(42).derive(STREAM_AUGMENT, 1)
    augment(img, policy, a)
    b.uniform(3)
    npt.assert_array_equal(a.next_raw(4), b.next_raw(4))


def test_augment_deterministic_given_stream():
    policy = AugmentPolicy()
    img = Rng(2).uniform((6, 6, 3), 0, 1, dtype=np.float64)
    out1 = augment(img, policy, Rng(7).derive(STREAM_AUGMENT, 3))
    out2 = augment(img, policy, Rng(7).derive(STREAM_AUGMENT, 3))
    npt.assert_array_equal(out1, out2)


def test_augment_never_flips_with_zero_probability():
    img = Rng(3).uniform((5, 5, 3), 0, 1, dtype=np.float64)
    out = augment(img, NO_AUGMENT, Rng(123))
    npt.assert_array_equal(out, img)


def test_augment_always_flips_with_probability_one():
    policy = AugmentPolicy(flip_horizontal_prob=1.0, flip_vertical_prob=1.0,
                           rotation_max_turns=0.0)
    img = Rng(4).uniform((5, 5, 3), 0, 1, dtype=np.float64)
    out = augment(img, policy, Rng(9))
    npt.assert_allclose(out, flip_vertical(flip_horizontal(img)), atol=1e-12)


def test_augment_rotation_bounded_by_policy():
    # max 0.1 turns = 36 degrees: the center pixel never moves far, and
    # output values stay within the input range extended by zero fill
    rng = Rng(5)
    img = rng.uniform((8, 8, 3), 0.5, 1, dtype=np.float64)
    policy = AugmentPolicy(0.0, 0.0, 0.1)
    for k in range(10):
        out = augment(img, policy, Rng(k).derive(STREAM_AUGMENT))
        assert out.shape == img.shape
        assert out.min() >= 0.0 and out.max() <= 1.0 + 1e-9


def test_policy_validation():
    with pytest.raises(ValueError):
        AugmentPolicy(flip_horizontal_prob=1.5)
    with pytest.raises(ValueError):
        AugmentPolicy(rotation_max_turns=0.6)
