import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from depthrr import DepthMap, add, depth_stats, make_hemisphere, subtract
from depthrr.errors import DimensionMismatch, EmptyMask, MaskCoverage


def full(values, grid=None):
    values = np.asarray(values, dtype=np.float32)
    return DepthMap(values, np.ones(values.shape, dtype=bool), grid)


class TestDepthStats:
    def test_constant_map(self):
        s = depth_stats(full(np.full((4, 5), 5.0)))
        assert (s.z_min, s.z_max, s.range) == (5.0, 5.0, 0.0)
        assert s.valid_count == 20

    def test_masked_extremum_excluded(self):
        values = np.array([[0.0, 3.0, 100.0]])
        valid = np.array([[True, True, False]])
        s = depth_stats(DepthMap(values, valid))
        assert s.range == 3.0
        assert s.valid_count == 2

    def test_empty_mask(self):
        with pytest.raises(EmptyMask):
            depth_stats(DepthMap(np.zeros((2, 2)), np.zeros((2, 2), bool)))

    @given(hnp.arrays(np.float32, (6, 7),
                      elements=st.floats(-1e4, 1e4, width=32)),
           hnp.arrays(np.bool_, (6, 7)),
           st.floats(-1e6, 1e6))
    @settings(max_examples=50, deadline=None)
    def test_invalid_values_never_matter(self, values, valid, junk):
        if not valid.any():
            return
        base = depth_stats(DepthMap(values, valid))
        poked = values.copy()
        poked[~valid] = np.float32(junk)
        assert depth_stats(DepthMap(poked, valid)) == base


class TestSubtractAdd:
    def test_zero_approx_is_identity(self, hemisphere):
        zero = full(np.zeros((512, 512)), hemisphere.grid)
        out = subtract(hemisphere, zero)
        assert np.array_equal(out.values, hemisphere.values)
        assert np.array_equal(out.valid, hemisphere.valid)

    def test_zero_residual_recovers_approx(self):
        approx = full(np.linspace(0, 9, 12).reshape(3, 4))
        zero = full(np.zeros((3, 4)))
        out = add(zero, approx)
        assert np.allclose(out.values, approx.values)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            subtract(full(np.zeros((2, 2))), full(np.zeros((3, 3))))
        with pytest.raises(DimensionMismatch):
            add(full(np.zeros((2, 2))), full(np.zeros((3, 3))))

    def test_mask_coverage(self):
        z = full(np.ones((2, 2)))
        approx = DepthMap(np.ones((2, 2)), np.array([[True, False],
                                                     [True, True]]))
        with pytest.raises(MaskCoverage):
            subtract(z, approx)

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=50, deadline=None)
    def test_bitwise_inverse_random_maps(self, seed):
        r = np.random.default_rng(seed)
        z = full(r.uniform(-1000, 1000, (8, 9)).astype(np.float32))
        a = full(r.uniform(-1000, 1000, (8, 9)).astype(np.float32))
        assert np.array_equal(add(subtract(z, a), a).values, z.values)

    def test_bitwise_inverse_pipeline_data(self, hemisphere, hemi_residual,
                                           hemi_thumbnail):
        from depthrr import upsample_bicubic
        approx = upsample_bicubic(hemi_thumbnail)
        assert np.array_equal(add(hemi_residual, approx).values,
                              hemisphere.values)

    def test_triangle_bound(self, rng):
        z = full(rng.uniform(0, 300, (16, 16)).astype(np.float32))
        a = full(rng.uniform(0, 300, (16, 16)).astype(np.float32))
        assert depth_stats(subtract(z, a)).range <= (depth_stats(z).range
                                                     + depth_stats(a).range)

    def test_grid_and_mask_carried(self, hemisphere):
        zero = full(np.zeros((512, 512)))
        out = subtract(hemisphere, zero)
        assert out.grid == hemisphere.grid


class TestMakeHemisphere:
    def test_depth_range_is_radius(self, hemisphere):
        assert depth_stats(hemisphere).range == 256.0

    def test_apex_value(self, hemisphere):
        assert hemisphere.values[256, 256] == 256.0

    def test_corner_outside_disk(self, hemisphere):
        assert hemisphere.values[0, 0] == 0.0

    def test_all_pixels_valid(self, hemisphere):
        assert hemisphere.valid.all()

    def test_bad_args(self):
        with pytest.raises(ValueError):
            make_hemisphere(0, 10.0)
        with pytest.raises(ValueError):
            make_hemisphere(8, -1.0)
