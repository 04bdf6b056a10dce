import numpy as np
import pytest

from conftest import disc
from signwave.errors import DegenerateShape, EmptyScene, InvalidInput, TooSmall
from signwave.sax import rotation_min_dist
from signwave.signature import (
    Contour, PipelineConfig, binarize, distance_signature, image_to_word, largest_contour,
    region_centroid,
)


def mask_image(mask):
    return np.where(mask, 0, 255).astype(np.uint8)


def square_image(size=200, lo=60, hi=140):
    img = np.full((size, size), 255, np.uint8)
    img[lo:hi, lo:hi] = 0
    return img


def signature_of(img, n=360):
    b = binarize(img)
    return distance_signature(largest_contour(b), region_centroid(b), n).samples


class TestBinarize:
    def test_black_is_foreground(self):
        assert binarize(np.zeros((8, 8), np.uint8)).all()

    def test_white_is_background(self):
        assert not binarize(np.full((8, 8), 255, np.uint8)).any()

    def test_split(self):
        img = np.full((8, 8), 255, np.uint8)
        img[:, :4] = 0
        b = binarize(img, 128, "dark_fg")
        assert b[:, :4].all() and not b[:, 4:].any()

    def test_light_polarity_and_threshold_edge(self):
        img = np.full((8, 8), 128, np.uint8)
        assert not binarize(img, 128, "dark_fg").any()
        assert binarize(img, 128, "light_fg").all()


class TestLargestContour:
    def test_square_ring(self):
        m = np.zeros((12, 12), np.uint8)
        m[5:8, 5:8] = 1
        c = largest_contour(m)
        assert c.points.tolist() == [[5, 5], [6, 5], [7, 5], [7, 6], [7, 7], [6, 7], [5, 7], [5, 6]]
        assert c.perimeter == pytest.approx(8.0)

    def test_larger_square_wins(self):
        m = np.zeros((20, 20), np.uint8)
        m[1:4, 1:4] = 1
        m[10:15, 10:15] = 1
        c = largest_contour(m)
        assert len(c) == 16
        assert c.points[:, 0].min() == 10 and c.points[:, 1].max() == 14

    def test_blank(self):
        with pytest.raises(EmptyScene):
            largest_contour(np.zeros((10, 10), np.uint8))

    def test_too_small(self):
        m = np.zeros((10, 10), np.uint8)
        m[2, 2:5] = 1
        with pytest.raises(TooSmall):
            largest_contour(m)


class TestCentroid:
    def test_square(self):
        m = np.zeros((12, 12), np.uint8)
        m[5:8, 5:8] = 1
        assert region_centroid(m) == (6.0, 6.0)

    def test_single_pixel_mask(self):
        m = np.zeros((12, 12), np.uint8)
        m[4, 10] = 1
        assert region_centroid(m, m.astype(bool)) == (10.0, 4.0)

    def test_rectangle(self):
        m = np.zeros((8, 8), np.uint8)
        m[0:4, 0:2] = 1
        assert region_centroid(m) == (0.5, 1.5)

    def test_from_contour(self):
        m = np.zeros((12, 12), np.uint8)
        m[5:8, 5:8] = 1
        assert region_centroid(m, largest_contour(m)) == (6.0, 6.0)

    def test_empty_component(self):
        m = np.zeros((8, 8), np.uint8)
        with pytest.raises(EmptyScene):
            region_centroid(m, np.ones((8, 8), bool))


class TestDistanceSignature:
    def test_circle_is_flat(self):
        v = signature_of(disc(50))
        assert (v.max() - v.min()) / v.mean() < 0.05

    def test_square_four_fold(self):
        v = signature_of(square_image())
        assert v.min() / v.max() == pytest.approx(1 / np.sqrt(2), rel=0.05)
        # corners every quarter of the boundary
        corners = np.sort(np.argsort(v)[-4:])
        assert np.allclose(np.diff(corners), 90, atol=1)
        np.testing.assert_allclose(v[corners], v.max(), rtol=1e-6)

    def test_square_rotation_is_shift(self):
        v = signature_of(square_image())
        r = signature_of(np.rot90(square_image()))
        best = min(np.abs(np.roll(v, k) - r).max() for k in (89, 90, 91))
        assert best < 2

    def test_sample_count(self):
        assert len(signature_of(square_image(), n=100)) == 100

    def test_zero_length(self):
        with pytest.raises(TooSmall):
            distance_signature(Contour(np.zeros((8, 2))), (0, 0), 64)

    def test_too_few_samples(self):
        with pytest.raises(InvalidInput):
            distance_signature(Contour(np.zeros((8, 2))), (0, 0), 8)


class TestImageToWord:
    def test_blank(self, blank):
        with pytest.raises(EmptyScene):
            image_to_word(blank)

    def test_circle_is_degenerate(self):
        with pytest.raises(DegenerateShape):
            image_to_word(disc(50))

    def test_spread_gate_can_be_disabled(self):
        word, _ = image_to_word(disc(50), PipelineConfig(min_relative_spread=0.0))
        assert len(word.symbols) == PipelineConfig().sax.w

    def test_deterministic(self, canonical_images):
        img = canonical_images["No"]
        assert image_to_word(img)[0] == image_to_word(img.copy())[0]

    def test_quarter_turns_are_exact(self, canonical_images):
        for img in canonical_images.values():
            base = image_to_word(img)[0]
            for k in (1, 2, 3):
                assert rotation_min_dist(image_to_word(np.rot90(img, k))[0], base)[0] == 0

    def test_light_foreground(self):
        inverted = 255 - square_image()
        w_dark, _ = image_to_word(square_image())
        w_light, _ = image_to_word(inverted, PipelineConfig(polarity="light_fg"))
        assert w_dark == w_light

    @pytest.mark.parametrize("kw", [dict(threshold=300), dict(samples=8), dict(polarity="x"),
                                    dict(min_relative_spread=-1)])
    def test_config_validation(self, kw):
        with pytest.raises((InvalidInput, ValueError)):
            PipelineConfig(**kw)
