import numpy as np
import pytest

from smalldet.freq import (
    HfpConfig,
    build_band_mask,
    build_hfp_mask,
    fd_split,
    fft2_centered,
    hfp_purify,
    ifft2_centered,
    purify_with_mask,
)


def naive_dft2_centered(x):
    """Matrix-product DFT oracle with an explicit centering permutation.

    Built from first principles (transform matrices and index rolls), no
    shared code with the library path.
    """
    x = np.asarray(x, dtype=np.complex128)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[:, :, None]
    h, w, c = x.shape
    fh = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    fw = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    out = np.empty_like(x)
    for k in range(c):
        out[:, :, k] = fh @ x[:, :, k] @ fw
    # Move DC (index 0) to (h//2, w//2).
    out = np.roll(np.roll(out, h // 2, axis=0), w // 2, axis=1)
    return out[:, :, 0] if squeeze else out


class TestTransforms:
    def test_constant_tensor_is_dc_only(self):
        x = np.full((6, 4), 2.5)
        s = fft2_centered(x)
        expected = np.zeros((6, 4), dtype=complex)
        expected[3, 2] = 2.5 * 24
        np.testing.assert_allclose(s, expected, atol=1e-9)

    def test_impulse_has_flat_magnitude(self):
        x = np.zeros((8, 8))
        x[5, 2] = 1.0
        s = fft2_centered(x)
        np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-12)

    def test_matches_naive_dft_oracle(self):
        rng = np.random.default_rng(17)
        for shape in ((4, 4), (5, 7), (8, 8, 2), (16, 12, 3)):
            x = rng.normal(size=shape)
            got = fft2_centered(x)
            np.testing.assert_allclose(got, naive_dft2_centered(x), atol=1e-8)

    def test_round_trip(self):
        rng = np.random.default_rng(18)
        x = rng.normal(size=(8, 8, 2))
        back = ifft2_centered(fft2_centered(x))
        assert np.abs(back - x).max() <= 1e-6

    def test_conjugate_symmetry_of_real_input(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(6, 8))
        s = fft2_centered(x)
        h, w = s.shape
        for i in range(h):
            for j in range(w):
                i2, j2 = (2 * (h // 2) - i) % h, (2 * (w // 2) - j) % w
                assert s[i, j] == pytest.approx(np.conj(s[i2, j2]), rel=1e-6, abs=1e-9)

    def test_parseval(self):
        rng = np.random.default_rng(20)
        x = rng.normal(size=(12, 10, 2))
        s = fft2_centered(x)
        space = float((np.abs(x) ** 2).sum())
        freq = float((np.abs(s) ** 2).sum()) / (12 * 10)
        assert abs(space - freq) / space <= 1e-5

    def test_asymmetric_mask_raises(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=(8, 8))
        s = fft2_centered(x)
        mask = np.ones((8, 8))
        mask[1, 3] = 0.0  # breaks point symmetry
        with pytest.raises(ValueError, match="point-symmetric"):
            ifft2_centered(mask * s)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            fft2_centered(np.zeros(5))
        with pytest.raises(ValueError):
            fft2_centered(np.zeros((0, 4)))
        with pytest.raises(ValueError):
            fft2_centered(np.array([[np.nan, 1.0]]))


class TestHfpMask:
    def test_zero_intensity_zeroes_only_dc(self):
        cfg = HfpConfig(relay_level=2, intensity=0.0)
        mask = build_hfp_mask(8, 8, 0, cfg)
        expected = np.ones((8, 8))
        expected[4, 4] = 0.0
        np.testing.assert_array_equal(mask, expected)

    def test_64x64_block_is_3x3(self):
        cfg = HfpConfig(relay_level=2, intensity=0.05)
        mask = build_hfp_mask(64, 64, 0, cfg)
        zeros = np.argwhere(mask == 0.0)
        assert sorted({int(r) for r, _ in zeros}) == [31, 32, 33]
        assert sorted({int(c) for _, c in zeros}) == [31, 32, 33]
        assert len(zeros) == 9

    def test_block_shrinks_with_level(self):
        cfg = HfpConfig(relay_level=2, intensity=0.4)
        m0 = build_hfp_mask(32, 32, 0, cfg)
        m1 = build_hfp_mask(32, 32, 1, cfg)
        assert (m0 == 0).sum() >= (m1 == 0).sum()
        # Level-1 zero block is contained in the level-0 one.
        assert not ((m1 == 0) & (m0 == 1)).any()

    def test_level_at_or_above_relay_rejected(self):
        cfg = HfpConfig(relay_level=2)
        with pytest.raises(ValueError):
            build_hfp_mask(8, 8, 2, cfg)
        with pytest.raises(ValueError):
            build_hfp_mask(8, 8, 5, cfg)

    def test_point_symmetry(self):
        cfg = HfpConfig(relay_level=3, intensity=0.31)
        for h, w in ((8, 8), (9, 7), (16, 9)):
            mask = build_hfp_mask(h, w, 0, cfg)
            for i in range(h):
                for j in range(w):
                    i2, j2 = (2 * (h // 2) - i) % h, (2 * (w // 2) - j) % w
                    assert mask[i, j] == mask[i2, j2]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            HfpConfig(intensity=1.5)
        with pytest.raises(ValueError):
            HfpConfig(relay_level=-1)
        with pytest.raises(ValueError):
            HfpConfig(residual_weight=-0.1)


class TestPurify:
    def test_all_pass_mask_scales_by_one_plus_weight(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=(8, 6, 2))
        out = purify_with_mask(x, np.ones((8, 6)), residual_weight=0.3)
        assert np.abs(out - 1.3 * x).max() <= 1e-5

    def test_zero_weight_is_identity(self):
        rng = np.random.default_rng(23)
        x = rng.normal(size=(10, 10))
        cfg = HfpConfig(relay_level=2, intensity=0.05, residual_weight=0.0)
        out = hfp_purify(x, 0, cfg)
        assert np.abs(out - x).max() <= 1e-5

    def test_constant_input_unchanged_under_dc_masking(self):
        x = np.full((12, 12, 3), 4.0)
        cfg = HfpConfig(relay_level=2, intensity=0.05, residual_weight=0.7)
        out = hfp_purify(x, 0, cfg)
        assert np.abs(out - x).max() <= 1e-5

    def test_linearity(self):
        rng = np.random.default_rng(24)
        x = rng.normal(size=(8, 8, 2))
        y = rng.normal(size=(8, 8, 2))
        cfg = HfpConfig(relay_level=2, intensity=0.2, residual_weight=0.4)
        lhs = hfp_purify(2.0 * x + 3.0 * y, 0, cfg)
        rhs = 2.0 * hfp_purify(x, 0, cfg) + 3.0 * hfp_purify(y, 0, cfg)
        assert np.abs(lhs - rhs).max() <= 1e-6

    def test_filtered_energy_non_increasing_in_intensity(self):
        rng = np.random.default_rng(25)
        x = rng.normal(size=(32, 32))
        energies = []
        for mu in (0.0, 0.1, 0.3, 0.6, 1.0):
            cfg = HfpConfig(relay_level=1, intensity=mu, residual_weight=1.0)
            filtered = hfp_purify(x, 0, cfg) - x
            energies.append(float((filtered ** 2).sum()))
        assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))

    def test_mask_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            purify_with_mask(np.zeros((4, 4)), np.ones((3, 3)), 0.3)


class TestBandMasks:
    def test_lowpass_full_cutoff_is_all_ones(self):
        np.testing.assert_array_equal(build_band_mask(8, 6, 1.0, "lowpass"),
                                      np.ones((8, 6)))

    def test_highpass_zero_cutoff_keeps_all_but_dc(self):
        mask = build_band_mask(8, 6, 0.0, "highpass")
        expected = np.ones((8, 6))
        expected[4, 3] = 0.0
        np.testing.assert_array_equal(mask, expected)

    def test_partition_identity(self):
        for cutoff in (0.0, 0.2, 0.5, 0.85, 1.0):
            low = build_band_mask(10, 12, cutoff, "lowpass")
            high = build_band_mask(10, 12, cutoff, "highpass")
            np.testing.assert_array_equal(low + high, np.ones((10, 12)))

    def test_kind_and_cutoff_validation(self):
        with pytest.raises(ValueError):
            build_band_mask(8, 8, 0.5, "bandpass")
        with pytest.raises(ValueError):
            build_band_mask(8, 8, 1.5, "lowpass")


class TestFdSplit:
    def test_all_pass_low_and_dc_removed_high(self):
        rng = np.random.default_rng(26)
        x = rng.normal(size=(8, 8, 2))
        low, high = fd_split(x, d_l=1.0, d_h=0.0)
        assert np.abs(low - x).max() <= 1e-6
        centered = x - x.mean(axis=(0, 1), keepdims=True)
        assert np.abs(high - centered).max() <= 1e-6

    def test_constant_input_high_is_zero(self):
        x = np.full((16, 16), 3.25)
        _, high = fd_split(x, d_l=0.85, d_h=0.10)
        assert np.abs(high).max() <= 1e-6

    def test_spectral_bookkeeping(self):
        # fft(low) + fft(high) must equal fft(x) * (lowmask + highmask).
        rng = np.random.default_rng(27)
        x = rng.normal(size=(12, 10))
        d = 0.4
        low, high = fd_split(x, d_l=d, d_h=d)
        s = fft2_centered(x)
        lhs = fft2_centered(low) + fft2_centered(high)
        masks = build_band_mask(12, 10, d, "lowpass") + build_band_mask(12, 10, d, "highpass")
        np.testing.assert_allclose(lhs, s * masks, atol=1e-8)

    def test_shapes_preserved(self):
        x = np.zeros((6, 7, 3))
        x[2, 3, 1] = 1.0
        low, high = fd_split(x)
        assert low.shape == x.shape and high.shape == x.shape
