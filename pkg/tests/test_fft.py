import numpy as np
import pytest
from scipy.linalg import dft
from core.errors import UnsupportedLengthError
from utils.fft import bit_reversal_permutation, fft


def test_bit_reversal_of_eight():
    np.testing.assert_array_equal(bit_reversal_permutation(8), [0, 4, 2, 6, 1, 5, 3, 7])


def test_impulse_is_flat():
    x = np.zeros(1024)
    x[0] = 1.0
    np.testing.assert_allclose(fft(x), np.ones(1024), atol=1e-12)


def test_cosine_lands_in_its_bins():
    n = 1024
    x = np.cos(2 * np.pi * 5 * np.arange(n) / n)
    mag = np.abs(fft(x))
    assert mag[5] == pytest.approx(n / 2)
    assert mag[n - 5] == pytest.approx(n / 2)
    mag[[5, n - 5]] = 0.0
    assert mag.max() < 1e-9


def test_matches_naive_dft_on_random_vectors():
    rng = np.random.default_rng(0)
    matrix = dft(1024)
    x = rng.normal(size=(256, 1024))
    expected = x @ matrix.T
    got = fft(x)
    rel = np.linalg.norm(got - expected, axis=1) / np.linalg.norm(expected, axis=1)
    assert rel.max() <= 1e-9


@pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 512])
def test_small_lengths_match_naive_dft(n):
    x = np.random.default_rng(n).normal(size=n) + 1j * np.random.default_rng(n + 1).normal(size=n)
    np.testing.assert_allclose(fft(x), dft(n) @ x, rtol=1e-9, atol=1e-9)


def test_linearity_and_parseval():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(2, 1024))
    np.testing.assert_allclose(fft(2.0 * x - 3.0 * y), 2.0 * fft(x) - 3.0 * fft(y), atol=1e-9)
    assert np.sum(np.abs(fft(x)) ** 2) == pytest.approx(1024 * np.sum(x ** 2), rel=1e-12)


def test_batched_rows_transform_independently():
    x = np.random.default_rng(2).normal(size=(3, 4, 16))
    out = fft(x)
    for i in range(3):
        for j in range(4):
            np.testing.assert_allclose(out[i, j], fft(x[i, j]), atol=1e-12)


@pytest.mark.parametrize("n", [0, 3, 1000])
def test_non_power_of_two_rejected(n):
    with pytest.raises(UnsupportedLengthError):
        fft(np.zeros(n))
