import numpy as np
import pytest

from dbfilter import GrayImage, SyntheticImageSpec, generate
from dbfilter.synthetic import KINDS


class TestSpecValidation:
    def test_kind_must_be_known(self):
        with pytest.raises(ValueError):
            SyntheticImageSpec("checkerboard", 8, 8)

    def test_dimensions_must_be_positive(self):
        with pytest.raises(ValueError):
            SyntheticImageSpec("oriented-fringe", 0, 8)

    def test_period_floor(self):
        with pytest.raises(ValueError):
            SyntheticImageSpec("oriented-fringe", 8, 8, period=3.0)

    def test_amplitude_sign(self):
        with pytest.raises(ValueError):
            SyntheticImageSpec("oriented-fringe", 8, 8, amplitude=-1.0)

    def test_levels_must_fit_display_range(self):
        with pytest.raises(ValueError):
            SyntheticImageSpec("oriented-fringe", 8, 8, amplitude=100.0,
                               offset=200.0)
        with pytest.raises(ValueError):
            SyntheticImageSpec("oriented-fringe", 8, 8, amplitude=100.0,
                               offset=50.0)


class TestFringe:
    def test_known_samples(self):
        img = generate(SyntheticImageSpec("oriented-fringe", 8, 4))
        assert img.data[0, 0] == 128.0
        # a quarter period along x reaches the positive peak
        assert abs(img.data[0, 2] - 228.0) < 1e-9
        assert abs(img.data[3, 6] - 28.0) < 1e-9

    def test_angle_zero_varies_only_along_columns(self):
        img = generate(SyntheticImageSpec("oriented-fringe", 16, 10))
        assert np.array_equal(img.data, np.tile(img.data[:1], (10, 1)))
        assert np.ptp(img.data[0]) > 150.0

    def test_quarter_turn_transposes_the_pattern(self):
        a = generate(SyntheticImageSpec("oriented-fringe", 12, 9, angle_deg=90.0))
        b = generate(SyntheticImageSpec("oriented-fringe", 9, 12, angle_deg=0.0))
        assert np.abs(a.data - b.data.T).max() < 1e-9

    def test_wavelength(self):
        img = generate(SyntheticImageSpec("oriented-fringe", 24, 4, period=6.0))
        assert np.abs(img.data[:, 6:] - img.data[:, :-6]).max() < 1e-9

    def test_zero_amplitude_is_constant(self):
        img = generate(SyntheticImageSpec("oriented-fringe", 6, 6, amplitude=0.0))
        assert np.array_equal(img.data, np.full((6, 6), 128.0))


class TestRings:
    def test_mirror_symmetry(self):
        img = generate(SyntheticImageSpec("concentric-rings", 17, 13))
        assert np.array_equal(img.data, np.flipud(img.data))
        assert np.array_equal(img.data, np.fliplr(img.data))

    def test_center_value(self):
        img = generate(SyntheticImageSpec("concentric-rings", 17, 17))
        assert img.data[8, 8] == 128.0


class TestWedge:
    def test_piecewise_constant_columns(self):
        img = generate(SyntheticImageSpec("step-wedge", 32, 5, period=8.0))
        for start in range(0, 32, 8):
            block = img.data[:, start:start + 8]
            assert np.ptp(block) == 0.0

    def test_levels_ascend_left_to_right(self):
        img = generate(SyntheticImageSpec("step-wedge", 32, 3, period=8.0))
        row = img.data[0]
        assert (np.diff(row) >= 0.0).all()
        assert row[0] == 28.0 and row[-1] == 228.0

    def test_rows_identical(self):
        img = generate(SyntheticImageSpec("step-wedge", 20, 7))
        assert np.array_equal(img.data, np.tile(img.data[:1], (7, 1)))


class TestGeneral:
    def test_all_kinds_stay_in_display_range(self):
        for kind in KINDS:
            img = generate(SyntheticImageSpec(kind, 21, 18))
            assert img.data.min() >= 0.0
            assert img.data.max() <= 255.0

    def test_generation_is_reproducible(self):
        spec = SyntheticImageSpec("oriented-fringe", 15, 11, angle_deg=37.0)
        assert np.array_equal(generate(spec).data, generate(spec).data)

    def test_returns_gray_image(self):
        assert isinstance(generate(SyntheticImageSpec("step-wedge", 4, 4)),
                          GrayImage)
