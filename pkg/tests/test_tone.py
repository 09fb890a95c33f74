import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from boardlens.errors import ConstantImage, DomainError
from boardlens.tone import (
    ExpParams, LinearMap, LogParams, emphasize, exp_curve, exp_transform, linear_transform,
    log_transform, rgb_to_gray, stretch,
)
from conftest import clamp8

LEVELS = np.arange(256, dtype=np.uint8).reshape(16, 16)


def test_gray_fixed_point_on_achromatic():
    v = np.arange(256, dtype=np.uint8)
    rgb = np.stack([v, v, v], axis=-1)[None]
    assert np.array_equal(rgb_to_gray(rgb)[0], v)


def test_gray_primaries():
    rgb = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255]]], dtype=np.uint8)
    assert rgb_to_gray(rgb).tolist() == [[76, 150, 29]]


def test_gray_matches_scalar_oracle(rng):
    rgb = rng.integers(0, 256, size=(40, 37, 3)).astype(np.uint8)
    out = rgb_to_gray(rgb)
    for r in range(rgb.shape[0]):
        for c in range(rgb.shape[1]):
            R, G, B = (int(v) for v in rgb[r, c])
            assert out[r, c] == clamp8(0.299 * R + 0.587 * G + 0.114 * B)


def test_linear_identity_all_levels():
    assert np.array_equal(linear_transform(LEVELS, LinearMap(0, 255, 0, 255)), LEVELS)


def test_linear_half_rounds_up():
    img = np.array([[150]], dtype=np.uint8)
    assert linear_transform(img, LinearMap(100, 200, 0, 255))[0, 0] == 128


def test_linear_endpoints():
    img = np.array([[30, 180]], dtype=np.uint8)
    out = linear_transform(img, LinearMap(30, 180, 10, 240))
    assert out.tolist() == [[10, 240]]
    assert LinearMap(100, 200, 0, 255).k == 2.55


def test_log_examples():
    img = np.array([[9, 0]], dtype=np.uint8)
    assert log_transform(img, LogParams(0, 10, 1)).tolist() == [[1, 0]]


def test_log_monotone():
    out = log_transform(LEVELS, LogParams(0, 2, 1)).ravel()
    assert (np.diff(out.astype(int)) >= 0).all()


def test_log_domain_error():
    with pytest.raises(DomainError):
        log_transform(LEVELS, LogParams(0, 10, 0))


def test_exp_identity_and_squares():
    assert np.array_equal(exp_transform(LEVELS, ExpParams(1, 0, 1)), LEVELS)
    out = exp_transform(LEVELS, ExpParams(1, 0, 2)).ravel()
    assert out[:16].tolist() == [f * f for f in range(16)]
    assert (out[16:] == 255).all()


def test_exp_concave_for_small_exponent():
    p = ExpParams(1, 0, 0.5)
    assert exp_curve(200, p) - exp_curve(190, p) < exp_curve(20, p) - exp_curve(10, p)


def test_exp_domain_error():
    with pytest.raises(DomainError):
        exp_transform(LEVELS, ExpParams(1, -10, 0.5))
    # Integer exponents accept negative bases.
    exp_transform(LEVELS, ExpParams(1, -10, 2))


def test_stretch_full_range_fixed_point():
    out, p = stretch(LEVELS)
    assert np.array_equal(out, LEVELS)
    assert p.mult == 1.0 and p.add == 0.0


def test_stretch_example():
    img = np.array([[50, 100, 150]], dtype=np.uint8)
    out, p = stretch(img)
    assert p.mult == 2.55 and p.add == -127.5
    assert out.tolist() == [[0, 128, 255]]


def test_stretch_range_property(rng):
    for _ in range(20):
        lo = int(rng.integers(0, 200))
        img = rng.integers(lo, lo + int(rng.integers(2, 56)), size=(20, 20)).astype(np.uint8)
        if img.min() == img.max():
            continue
        out, _ = stretch(img)
        assert out.min() == 0 and out.max() == 255
        again, p = stretch(out)
        assert 0.99 <= p.mult <= 1.01


def test_stretch_constant_raises():
    with pytest.raises(ConstantImage):
        stretch(np.full((3, 3), 9, dtype=np.uint8))


def test_emphasize_constant_and_zero_factor(rng):
    flat = np.full((10, 10), 77, dtype=np.uint8)
    assert np.array_equal(emphasize(flat, 7, 1.0), flat)
    img = rng.integers(0, 256, size=(12, 12)).astype(np.uint8)
    assert np.array_equal(emphasize(img, 3, 0.0), img)


def test_emphasize_step_profile():
    img = np.zeros((6, 8), dtype=np.uint8)
    img[:, 4:] = 90
    out = emphasize(img, 3, 1.0)
    # Left of the step the 3x3 mean is 30 so the pixel drops by 30 and
    # clamps at 0; right of it the mean is 60 so the pixel rises by 30.
    assert out[2, 3] == 0
    assert out[2, 4] == 120
    assert out[2, 1] == 0 and out[2, 6] == 90


def test_emphasize_step_on_gray_base():
    img = np.full((5, 8), 100, dtype=np.uint8)
    img[:, 4:] = 160
    out = emphasize(img, 3, 1.0)
    assert out[2, 3] == 80 and out[2, 4] == 180


@settings(max_examples=40)
@given(arrays(np.uint8, (6, 6)), st.floats(0.1, 5.0), st.floats(-300, 300))
def test_transforms_clamp(img, c, a):
    for out in (exp_transform(img, ExpParams(a, 0, c)),
                log_transform(img, LogParams(a, 2.0, 1.0)),
                emphasize(img, 3, c)):
        assert out.dtype == np.uint8
