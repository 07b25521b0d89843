import math

import numpy as np
import pytest
from scipy.ndimage import maximum_filter, minimum_filter

import reference as ref
from dbfilter import (
    FilterParams,
    GrayImage,
    OrientationField,
    SyntheticImageSpec,
    apply_filter,
    default_window_radius,
    domain_weight_gaussian,
    domain_weight_oriented,
    generate,
    orientation_field,
    range_weight,
)


def isotropic_field(shape):
    """A do-nothing steering field: zero angle, unit scalings."""
    z = np.zeros(shape)
    return OrientationField(z, np.ones(shape), np.ones(shape))


class TestWeights:
    def test_gaussian_center(self):
        assert domain_weight_gaussian(0.0, 0.0, 2.0) == 1.0

    def test_gaussian_at_one_sigma(self):
        # offset norm 5 with sigma 5 gives exp(-1/2) exactly
        assert domain_weight_gaussian(3.0, 4.0, 5.0) == math.exp(-0.5)

    def test_gaussian_radial_symmetry(self):
        w = domain_weight_gaussian
        assert w(1.0, 2.0, 1.3) == w(2.0, -1.0, 1.3) == w(-2.0, 1.0, 1.3)

    def test_oriented_center(self):
        assert domain_weight_oriented(0.0, 0.0, 0.7, 0.5, 2.0, 1.0) == 1.0

    def test_oriented_axis_aligned_values(self):
        # theta 0, scalings (1/2, 2), unit scale: the along-x coordinate is
        # shrunk and the along-y coordinate is stretched
        assert domain_weight_oriented(1.0, 0.0, 0.0, 0.5, 2.0, 1.0) == math.exp(-0.125)
        assert domain_weight_oriented(0.0, 1.0, 0.0, 0.5, 2.0, 1.0) == math.exp(-2.0)

    def test_oriented_reduces_to_isotropic(self):
        got = domain_weight_oriented(3.0, 4.0, 0.7, 1.0, 1.0, 5.0)
        assert abs(got - math.exp(-0.5)) < 1e-12

    def test_oriented_elongation_along_theta(self):
        # along the smoothing direction decay is slower than across it
        along = domain_weight_oriented(2.0, 0.0, 0.0, 0.5, 2.0, 1.5)
        across = domain_weight_oriented(0.0, 2.0, 0.0, 0.5, 2.0, 1.5)
        assert along > across

    def test_range_weight_values(self):
        assert range_weight(10.0, 10.0, 30.0) == 1.0
        assert range_weight(100.0, 130.0, 30.0) == math.exp(-0.5)

    def test_range_weight_huge_scale_is_flat(self):
        assert range_weight(0.0, 255.0, 1e9) > 1.0 - 1e-9

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            domain_weight_gaussian(1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            domain_weight_oriented(1.0, 1.0, 0.0, 0.5, 2.0, -1.0)
        with pytest.raises(ValueError):
            range_weight(1.0, 1.0, 0.0)


class TestParams:
    def test_default_radius_isotropic(self):
        assert default_window_radius("gbf", 2.0) == 6
        assert FilterParams("gbf", 2.0, 30.0).window_radius == 6

    def test_default_radius_oriented_covers_stretched_axis(self):
        # gamma2 can double the effective scale, hence 6 scales, not 3
        assert default_window_radius("dbf", 2.0) == 12
        assert FilterParams("adf", 2.0).window_radius == 12

    def test_default_radius_is_capped(self):
        assert default_window_radius("dbf", 10.0) == 15
        assert default_window_radius("gbf", 50.0) == 15

    def test_default_radius_is_at_least_one(self):
        assert default_window_radius("gbf", 0.01) == 1

    def test_explicit_radius_wins(self):
        assert FilterParams("gbf", 2.0, 30.0, window_radius=4).window_radius == 4

    def test_zero_radius_allowed(self):
        assert FilterParams("dbf", 1.0, 10.0, window_radius=0).window_radius == 0

    def test_validation(self):
        with pytest.raises(ValueError):
            FilterParams("median", 1.0, 10.0)
        with pytest.raises(ValueError):
            FilterParams("dbf", -1.0, 10.0)
        with pytest.raises(ValueError):
            FilterParams("dbf", 1.0, None)
        with pytest.raises(ValueError):
            FilterParams("gbf", 1.0, -5.0)
        with pytest.raises(ValueError):
            FilterParams("gbf", 1.0, 10.0, window_radius=-1)
        with pytest.raises(ValueError):
            FilterParams("gbf", 1.0, 10.0, boundary="wrap")

    def test_adf_needs_no_range_scale(self):
        p = FilterParams("adf", 1.5)
        assert p.rho_r is None


class TestAgainstBruteForce:
    def test_all_variants_small_random(self, rng):
        for _ in range(4):
            y = rng.uniform(0, 255, (8, 8))
            img = GrayImage(y)
            fld = orientation_field(img)
            for variant in ("gbf", "adf", "dbf"):
                p = FilterParams(variant, 1.7, 25.0, window_radius=2)
                out = apply_filter(img, p, None if variant == "gbf" else fld)
                want = ref.brute_filter(
                    y, variant, 1.7, 25.0, 2,
                    theta=None if variant == "gbf" else fld.theta,
                    gamma1=None if variant == "gbf" else fld.gamma1,
                    gamma2=None if variant == "gbf" else fld.gamma2)
                assert np.abs(out.data - want).max() < 1e-12

    def test_window_larger_than_image(self, rng):
        # mirror padding folds every tap back inside; oracle does the same
        y = rng.uniform(0, 255, (5, 4))
        img = GrayImage(y)
        p = FilterParams("gbf", 2.0, 40.0, window_radius=6)
        out = apply_filter(img, p)
        want = ref.brute_filter(y, "gbf", 2.0, 40.0, 6)
        assert np.abs(out.data - want).max() < 1e-12

    def test_single_pixel_image(self):
        img = GrayImage(np.array([[42.0]]))
        p = FilterParams("gbf", 1.0, 10.0, window_radius=3)
        assert apply_filter(img, p).data[0, 0] == 42.0


class TestFilterProperties:
    def test_constant_image_is_a_fixed_point(self):
        for c in (0.0, 77.3, 128.0, 255.0):
            img = GrayImage(np.full((9, 11), c))
            fld = orientation_field(img)
            for variant, rr in (("gbf", 30.0), ("adf", None), ("dbf", 30.0)):
                p = FilterParams(variant, 2.0, rr, window_radius=3)
                out = apply_filter(img, p, None if variant == "gbf" else fld)
                assert np.array_equal(out.data, img.data)

    def test_output_stays_inside_window_hull(self, rng):
        for variant, rr in (("gbf", 18.0), ("adf", None), ("dbf", 18.0)):
            y = rng.uniform(0, 255, (12, 10))
            img = GrayImage(y)
            fld = orientation_field(img)
            out = apply_filter(img, FilterParams(variant, 1.2, rr, window_radius=2),
                               None if variant == "gbf" else fld)
            lo = minimum_filter(y, size=5, mode="mirror")
            hi = maximum_filter(y, size=5, mode="mirror")
            assert (out.data >= lo).all()
            assert (out.data <= hi).all()

    def test_brute_weight_rows_are_normalized(self, rng):
        y = rng.uniform(0, 255, (6, 6))
        fld = orientation_field(GrayImage(y))
        w = ref.brute_filter_matrix(y, "dbf", 1.5, 20.0, 2,
                                    fld.theta, fld.gamma1, fld.gamma2)
        assert np.abs(w.sum(axis=1) - 1.0).max() < 1e-12

    def test_intensity_shift_equivariance(self, rng):
        y = rng.uniform(10, 200, (16, 16))
        fld = orientation_field(GrayImage(y))
        p = FilterParams("dbf", 2.0, 30.0, window_radius=3)
        a = apply_filter(GrayImage(y), p, fld)
        b = apply_filter(GrayImage(y + 25.0), p, fld)
        assert np.abs(b.data - 25.0 - a.data).max() < 1e-9

    def test_wide_range_kernel_recovers_plain_blur(self, rng):
        y = rng.uniform(0, 255, (10, 10))
        out = apply_filter(GrayImage(y), FilterParams("gbf", 1.5, 1e9, window_radius=4))
        h, w = y.shape
        blur = ref.brute_filter(y, "adf", 1.5, None, 4,
                                theta=np.zeros((h, w)),
                                gamma1=np.ones((h, w)),
                                gamma2=np.ones((h, w)))
        assert np.abs(out.data - blur).max() < 1e-9

    def test_degenerate_steering_equals_isotropic_bitwise(self, rng):
        # theta 0 and unit gammas turn the oriented quadratic into dx^2+dy^2
        # with the same arithmetic, so outputs must agree to the last bit
        y = rng.uniform(0, 255, (14, 9))
        img = GrayImage(y)
        p = FilterParams("dbf", 1.8, 22.0, window_radius=4)
        dbf = apply_filter(img, p, isotropic_field(y.shape))
        gbf = apply_filter(img, FilterParams("gbf", 1.8, 22.0, window_radius=4))
        assert np.array_equal(dbf.data, gbf.data)

    def test_wide_range_kernel_turns_dbf_into_adf(self, rng):
        y = rng.uniform(0, 255, (12, 12))
        img = GrayImage(y)
        fld = orientation_field(img)
        adf = apply_filter(img, FilterParams("adf", 2.0, window_radius=4), fld)
        dbf = apply_filter(img, FilterParams("dbf", 2.0, 1e9, window_radius=4), fld)
        assert np.abs(adf.data - dbf.data).max() < 1e-6

    def test_quarter_turn_equivariance_isotropic(self, rng):
        y = rng.uniform(0, 255, (10, 13))
        p = FilterParams("gbf", 1.5, 25.0, window_radius=3)
        a = apply_filter(GrayImage(np.rot90(y).copy()), p)
        b = apply_filter(GrayImage(y), p)
        assert np.abs(a.data - np.rot90(b.data)).max() < 1e-10

    def test_quarter_turn_equivariance_steered(self):
        base = generate(SyntheticImageSpec("oriented-fringe", 32, 32,
                                           period=8.0, angle_deg=35.0))
        rot = GrayImage(np.rot90(base.data).copy())
        p = FilterParams("dbf", 2.0, 30.0, window_radius=4)
        a = apply_filter(rot, p, orientation_field(rot))
        b = apply_filter(base, p, orientation_field(base))
        assert np.abs(a.data - np.rot90(b.data)).max() < 1e-6

    def test_oriented_filter_beats_isotropic_across_a_fringe(self, rng):
        # same domain scale: smoothing along stripes must lose less signal
        clean = generate(SyntheticImageSpec("oriented-fringe", 48, 48,
                                            period=8.0, angle_deg=30.0))
        noisy = GrayImage(np.clip(clean.data + rng.normal(0, 15, (48, 48)), 0, 255))
        fld = orientation_field(noisy)
        adf = apply_filter(noisy, FilterParams("adf", 1.5, window_radius=5), fld)
        iso = apply_filter(noisy, FilterParams("dbf", 1.5, 1e9, window_radius=5),
                           isotropic_field((48, 48)))
        err_adf = np.mean((adf.data - clean.data) ** 2)
        err_iso = np.mean((iso.data - clean.data) ** 2)
        assert err_adf < err_iso


class TestFieldPlumbing:
    def test_isotropic_rejects_field(self):
        img = GrayImage(np.zeros((6, 6)))
        with pytest.raises(ValueError):
            apply_filter(img, FilterParams("gbf", 1.0, 10.0),
                         isotropic_field((6, 6)))

    def test_steered_requires_field(self):
        img = GrayImage(np.zeros((6, 6)))
        with pytest.raises(ValueError):
            apply_filter(img, FilterParams("dbf", 1.0, 10.0))
        with pytest.raises(ValueError):
            apply_filter(img, FilterParams("adf", 1.0))

    def test_field_shape_must_match(self):
        img = GrayImage(np.zeros((6, 6)))
        with pytest.raises(ValueError):
            apply_filter(img, FilterParams("dbf", 1.0, 10.0),
                         isotropic_field((5, 6)))

    def test_identity_window(self, rng):
        y = rng.uniform(0, 255, (7, 7))
        img = GrayImage(y)
        out = apply_filter(img, FilterParams("gbf", 1.0, 10.0, window_radius=0))
        assert np.array_equal(out.data, y)
