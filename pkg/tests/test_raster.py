"""Tests for raster loading, channel handling, thresholding, and resizing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import oracles
from docwave import (
    as_plane,
    binarize,
    combine_channels,
    load_raster,
    luma,
    mask_from_raster,
    mask_to_raster,
    otsu_threshold,
    plane_to_raster,
    resize_bicubic,
    save_raster,
    split_channels,
)
from docwave.raster import replicate_pad


def random_raster(rng, h, w, color):
    shape = (h, w, 3) if color else (h, w)
    return rng.integers(0, 256, size=shape, dtype=np.uint8)


class TestRasterIO:
    @pytest.mark.parametrize("ext", ["png", "bmp", "tif", "tiff"])
    @pytest.mark.parametrize("color", [False, True])
    def test_save_load_round_trip(self, tmp_path, ext, color):
        rng = np.random.default_rng(7)
        raster = random_raster(rng, 21, 17, color)
        path = str(tmp_path / f"img.{ext}")
        save_raster(path, raster)
        back = load_raster(path)
        assert back.dtype == np.uint8
        np.testing.assert_array_equal(back, raster)

    def test_save_rejects_unknown_extension(self, tmp_path):
        with pytest.raises(ValueError):
            save_raster(str(tmp_path / "img.gif"), np.zeros((4, 4), dtype=np.uint8))

    def test_load_normalizes_palette_and_alpha(self, tmp_path):
        from PIL import Image

        img = Image.new("RGBA", (5, 4), (10, 20, 30, 255))
        path = str(tmp_path / "img.png")
        img.save(path)
        raster = load_raster(path)
        assert raster.shape == (4, 5, 3)
        np.testing.assert_array_equal(raster[0, 0], [10, 20, 30])

    def test_save_mask_renders_foreground_black(self, tmp_path):
        mask = np.zeros((6, 6), dtype=bool)
        mask[2, 3] = True
        path = str(tmp_path / "mask.png")
        save_raster(path, mask)
        back = load_raster(path)
        assert back[2, 3] == 0
        assert back[0, 0] == 255


class TestChannels:
    def test_split_pure_red(self):
        raster = np.zeros((2, 2, 3), dtype=np.uint8)
        raster[..., 0] = 200
        bundle = split_channels(raster)
        assert float(bundle.red[0, 0]) == 200.0
        assert float(bundle.green[0, 0]) == 0.0
        assert float(bundle.blue[0, 0]) == 0.0

    def test_split_rejects_gray(self):
        with pytest.raises(ValueError):
            split_channels(np.zeros((4, 4), dtype=np.uint8))

    def test_combine_restores_original(self):
        rng = np.random.default_rng(3)
        raster = random_raster(rng, 9, 11, True)
        bundle = split_channels(raster)
        back = combine_channels(bundle.red, bundle.green, bundle.blue)
        np.testing.assert_array_equal(back, raster)

    def test_combine_clips_and_rounds(self):
        hot = np.full((2, 2), 300.0)
        cold = np.full((2, 2), -5.0)
        mid = np.full((2, 2), 99.5)
        out = combine_channels(hot, cold, mid)
        assert out[0, 0, 0] == 255
        assert out[0, 0, 1] == 0
        assert out[0, 0, 2] == 100

    def test_luma_on_pure_red(self):
        raster = np.zeros((1, 1, 3), dtype=np.uint8)
        raster[..., 0] = 255
        assert luma(raster)[0, 0] == pytest.approx(76.245)

    def test_luma_matches_scalar(self):
        rng = np.random.default_rng(11)
        raster = random_raster(rng, 8, 13, True)
        expected = np.array(oracles.luma_scalar(raster))
        np.testing.assert_allclose(luma(raster), expected, rtol=1e-12)

    def test_as_plane_gray_passthrough_values(self):
        raster = np.arange(12, dtype=np.uint8).reshape(3, 4)
        plane = as_plane(raster)
        assert plane.dtype == np.float64
        np.testing.assert_array_equal(plane, raster.astype(np.float64))

    def test_as_plane_reduces_color_via_luma(self):
        rng = np.random.default_rng(5)
        raster = random_raster(rng, 6, 6, True)
        np.testing.assert_array_equal(as_plane(raster), luma(raster))


class TestMasks:
    def test_mask_raster_round_trip(self):
        rng = np.random.default_rng(2)
        mask = rng.random((15, 10)) < 0.4
        back = mask_from_raster(mask_to_raster(mask))
        np.testing.assert_array_equal(back, mask)

    def test_mask_from_raster_antialiased_levels(self):
        raster = np.array([[100, 200]], dtype=np.uint8)
        mask = mask_from_raster(raster)
        assert bool(mask[0, 0]) is True
        assert bool(mask[0, 1]) is False


class TestBinarize:
    def test_strictly_below_cutoff_is_foreground(self):
        plane = np.array([[100.0, 127.0, 127.5, 128.0, 200.0]])
        mask = binarize(plane, 127.5)
        assert mask.tolist() == [[True, True, False, False, False]]

    def test_raising_cutoff_grows_foreground(self):
        rng = np.random.default_rng(9)
        plane = rng.uniform(0, 255, size=(20, 20))
        low = binarize(plane, 60.0)
        high = binarize(plane, 190.0)
        assert bool(np.all(high[low]))

    @given(cutoff=st.floats(min_value=0.0, max_value=255.0))
    def test_foreground_values_all_below_cutoff(self, cutoff):
        plane = np.linspace(0.0, 255.0, 64).reshape(8, 8)
        mask = binarize(plane, cutoff)
        if mask.any():
            assert float(plane[mask].max()) < cutoff
        if (~mask).any():
            assert float(plane[~mask].min()) >= cutoff


class TestOtsu:
    def test_bimodal_plane(self):
        plane = np.array([[50.0] * 8, [200.0] * 8])
        assert otsu_threshold(plane) == 51

    def test_constant_plane_returns_its_bin(self):
        assert otsu_threshold(np.full((4, 4), 128.0)) == 128
        assert otsu_threshold(np.full((4, 4), 42.3)) == 42

    def test_out_of_range_values_clip_into_histogram(self):
        plane = np.array([[-50.0, -20.0], [300.0, 280.0]])
        assert otsu_threshold(plane) == oracles.otsu_scalar(plane)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            mode = rng.integers(0, 3)
            if mode == 0:
                plane = rng.uniform(0, 255, size=(12, 12))
            elif mode == 1:
                lo = rng.normal(60, 10, size=(12, 12))
                hi = rng.normal(190, 12, size=(12, 12))
                pick = rng.random((12, 12)) < 0.5
                plane = np.where(pick, lo, hi)
            else:
                plane = rng.integers(0, 4, size=(12, 12)).astype(np.float64) * 80
            assert otsu_threshold(plane) == oracles.otsu_scalar(plane)

    def test_threshold_separates_classes(self):
        rng = np.random.default_rng(23)
        plane = rng.uniform(0, 255, size=(16, 16))
        t = otsu_threshold(plane)
        quantized = np.clip(np.rint(plane), 0, 255)
        assert 1 <= t <= 255 or np.unique(quantized).size == 1


class TestBicubic:
    def test_identity_resize_is_exact(self):
        rng = np.random.default_rng(31)
        plane = rng.uniform(0, 255, size=(13, 9))
        out = resize_bicubic(plane, 9, 13)
        np.testing.assert_array_equal(out, plane)

    def test_constant_plane_preserved(self):
        plane = np.full((5, 7), 42.0)
        out = resize_bicubic(plane, 20, 11)
        np.testing.assert_allclose(out, 42.0, rtol=0, atol=1e-12)

    def test_known_two_by_two_upsample(self):
        plane = np.array([[0.0, 100.0], [100.0, 200.0]])
        expected = np.array(
            [
                [-14.0625, 13.28125, 72.65625, 100.0],
                [13.28125, 40.625, 100.0, 127.34375],
                [72.65625, 100.0, 159.375, 186.71875],
                [100.0, 127.34375, 186.71875, 214.0625],
            ]
        )
        out = resize_bicubic(plane, 4, 4)
        np.testing.assert_allclose(out, expected, rtol=0, atol=1e-12)

    @pytest.mark.parametrize(
        "src,dst",
        [((6, 8), (11, 5)), ((16, 16), (7, 7)), ((3, 5), (9, 2)), ((10, 4), (4, 10))],
    )
    def test_matches_scalar_oracle(self, src, dst):
        rng = np.random.default_rng(sum(src) + sum(dst))
        plane = rng.uniform(0, 255, size=src)
        out = resize_bicubic(plane, dst[1], dst[0])
        expected = np.array(oracles.bicubic_scalar(plane, dst[1], dst[0]))
        np.testing.assert_allclose(out, expected, rtol=1e-9, atol=1e-9)

    def test_single_pixel_upsample(self):
        plane = np.array([[77.0]])
        out = resize_bicubic(plane, 6, 4)
        np.testing.assert_allclose(out, 77.0, rtol=0, atol=1e-12)

    def test_rejects_bad_targets(self):
        plane = np.zeros((4, 4))
        with pytest.raises(ValueError):
            resize_bicubic(plane, 0, 4)
        with pytest.raises(ValueError):
            resize_bicubic(plane, 4, -1)

    @settings(max_examples=25, deadline=None)
    @given(
        plane=hnp.arrays(
            np.float64,
            hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=12),
            elements=st.floats(min_value=0.0, max_value=255.0),
        ),
        scale=st.sampled_from([(2, 2), (3, 1), (1, 3)]),
    )
    def test_upsample_range_stays_bounded(self, plane, scale):
        h, w = plane.shape
        out = resize_bicubic(plane, w * scale[1], h * scale[0])
        # Catmull-Rom overshoot is bounded by the kernel's negative lobes.
        assert float(out.min()) >= -0.25 * 255.0 - 1e-9
        assert float(out.max()) <= 1.25 * 255.0 + 1e-9


class TestPadding:
    def test_replicate_pad_extends_edges(self):
        plane = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = replicate_pad(plane, 1, 2)
        assert out.shape == (4, 3)
        assert out[3, 2] == 4.0
        assert out[0, 2] == 2.0

    def test_plane_to_raster_quantizes(self):
        plane = np.array([[-3.0, 99.5, 300.0]])
        out = plane_to_raster(plane)
        assert out.tolist() == [[0, 100, 255]]
