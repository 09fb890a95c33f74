import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boardlens.errors import ConstantTemplate, WindowOutOfBounds
from boardlens.matching import Template, correlation_coefficient, ncc_map, ncc_match, sad, ssd
from conftest import naive_ncc, naive_sad, naive_ssd, random_gray


def test_self_match(rng):
    img = random_gray(rng, 30, 40)
    tmpl = img[7:7 + 6, 3:3 + 9]
    res = ncc_match(img, tmpl)
    assert res.position == (7, 3)
    assert abs(res.score - 1) < 1e-9


def test_inverted_template(rng):
    img = random_gray(rng, 30, 30)
    tmpl = 255 - img[10:15, 4:12]
    scores = ncc_map(img, tmpl)
    assert abs(scores[10, 4] + 1) < 1e-9


def test_matches_naive_oracle(rng):
    for _ in range(20):
        img = random_gray(rng, int(rng.integers(16, 33)), int(rng.integers(16, 33)))
        tmpl = random_gray(rng, 5, 5)
        assert np.abs(ncc_map(img, tmpl) - naive_ncc(img, tmpl)).max() < 1e-9
    big = random_gray(rng, 32, 32)
    tmpl = random_gray(rng, 5, 5)
    assert np.abs(ncc_map(big, tmpl) - naive_ncc(big, tmpl)).max() < 1e-9


def test_flat_windows_score_zero(rng):
    img = np.zeros((20, 20), dtype=np.uint8)
    img[10:, 10:] = rng.integers(0, 256, size=(10, 10))
    scores = ncc_map(img, random_gray(rng, 4, 4))
    assert (scores[:6, :6] == 0).all()


def test_constant_template_rejected():
    with pytest.raises(ConstantTemplate):
        ncc_match(np.zeros((10, 10), dtype=np.uint8), np.full((3, 3), 5, dtype=np.uint8))


def test_template_too_large():
    with pytest.raises(WindowOutOfBounds):
        ncc_map(np.zeros((4, 4), dtype=np.uint8), np.eye(5, dtype=np.uint8))


def test_tie_break_first_row_major():
    img = np.zeros((10, 10), dtype=np.uint8)
    patch = np.array([[0, 255], [255, 0]], dtype=np.uint8)
    img[2:4, 6:8] = patch
    img[5:7, 1:3] = patch
    assert ncc_match(img, patch).position == (2, 6)


def test_score_map_range(rng):
    for _ in range(5):
        s = ncc_map(random_gray(rng), random_gray(rng, 6, 4))
        assert s.min() >= -1 and s.max() <= 1


@settings(max_examples=50)
@given(st.floats(0.01, 50), st.floats(-500, 500), st.integers(0, 2 ** 31))
def test_affine_invariance(alpha, beta, seed):
    rng = np.random.default_rng(seed)
    window = rng.integers(0, 256, size=(6, 7)).astype(float)
    patch = rng.integers(0, 256, size=(6, 7)).astype(float)
    if window.std() == 0 or patch.std() == 0:
        return
    a = correlation_coefficient(window, patch)
    b = correlation_coefficient(alpha * window + beta, patch)
    assert abs(a - b) < 1e-9


def test_sad_ssd_examples():
    t = np.zeros((5, 5), dtype=np.uint8)
    assert sad(t, t, (0, 0)) == 0 and ssd(t, t, (0, 0)) == 0
    assert sad(np.full((5, 5), 255, dtype=np.uint8), t, (0, 0)) == 255
    t2 = np.arange(25, dtype=np.uint8).reshape(5, 5) + 100
    assert sad(np.clip(t2.astype(int) + 30, 0, 255).astype(np.uint8), t2, (0, 0)) == 30
    one = t2.copy()
    one[2, 2] += 10
    assert ssd(one, t2, (0, 0)) == 4.0


def test_sad_ssd_match_naive(rng):
    for _ in range(20):
        img = random_gray(rng)
        tmpl = random_gray(rng, 5, 6)
        at = (int(rng.integers(0, img.shape[0] - 4)), int(rng.integers(0, img.shape[1] - 5)))
        assert sad(img, tmpl, at) == naive_sad(img, tmpl, at)
        assert ssd(img, tmpl, at) == naive_ssd(img, tmpl, at)
        s, q = sad(img, tmpl, at), ssd(img, tmpl, at)
        assert q >= s * s - 1e-9
        assert q >= s * s / 255
        win = img[at[0]:at[0] + 5, at[1]:at[1] + 6]
        assert sad(win, tmpl, (0, 0)) == sad(tmpl, win, (0, 0))
        assert ssd(win, tmpl, (0, 0)) == ssd(tmpl, win, (0, 0))


def test_sad_out_of_bounds():
    with pytest.raises(WindowOutOfBounds):
        sad(np.zeros((5, 5), dtype=np.uint8), np.zeros((3, 3), dtype=np.uint8), (3, 0))


def test_template_precomputes():
    t = Template.from_patch(np.array([[0, 10], [20, 30]], dtype=np.uint8))
    assert t.mean == 15
    assert abs(t.centered_norm - np.sqrt(500)) < 1e-12
