import numpy as np
import pytest

from hyplane.layout import (
    EVEN_NAMES,
    Rect,
    RegionLayout,
    UNUSED,
    UnifiedMap,
    Variant,
    area_biased_layout_22,
    area_biased_layout_31,
    build,
    even_layout,
    layout_entries_json,
    random_representation,
    split,
    unified_noise_map,
)
from hyplane.plane import FeatureGrid, noise_grid, sample_bilinear
from hyplane.representation import HyPlane22, HyPlane31, TriPlane, component_features
from hyplane.warp import WarpKind


class TestEvenLayout:
    def test_quadrants_at_512(self):
        layout = even_layout(512, EVEN_NAMES[Variant.HY_PLANE_31])
        assert all(r.w == 256 and r.h == 256 for _, r in layout.entries)
        assert sum(r.area for _, r in layout.entries) == 512 * 512
        assert layout.is_exact_tiling()

    def test_smallest_legal(self):
        layout = even_layout(4, EVEN_NAMES[Variant.HY_PLANE_22])
        assert all(r.w == 2 and r.h == 2 for _, r in layout.entries)
        assert layout.is_exact_tiling()

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            even_layout(9, EVEN_NAMES[Variant.HY_PLANE_31])


class TestAreaBiasedLayout:
    def test_partition_areas_at_512(self):
        layout = area_biased_layout_31(512)
        areas = sorted((r.area for _, r in layout.entries), reverse=True)
        assert areas == [384 * 384, 384 * 128, 384 * 128, 128 * 128]
        assert sum(areas) == 512 * 512
        sphere = layout.region("sphere")
        assert sphere.area == max(areas)
        assert (sphere.w, sphere.h) == (384, 384)
        # the two elongated planar maps run along different axes
        assert layout.region("xy").w > layout.region("xy").h
        assert layout.region("yz").h > layout.region("yz").w

    def test_exact_tiling_by_texel_scan(self):
        for layout in (area_biased_layout_31(512), area_biased_layout_22(512)):
            counts = layout.coverage_counts()
            assert counts.shape == (512, 512)
            assert np.all(counts == 1)

    def test_other_sizes_still_tile(self):
        for size in (8, 64, 100, 250, 256):
            layout = area_biased_layout_31(size)
            assert layout.is_exact_tiling(), size

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            area_biased_layout_31(6)

    def test_cap_fraction_recorded(self):
        layout = area_biased_layout_22(512, cap_fraction=0.3)
        assert layout.cap_fraction == 0.3
        with pytest.raises(ValueError, match="cap_fraction"):
            area_biased_layout_22(512, cap_fraction=0.8)


class TestSplit:
    def test_views_alias_unified_storage(self):
        um = unified_noise_map(even_layout(16, EVEN_NAMES[Variant.HY_PLANE_31]), channels=3, seed=5)
        views = split(um)
        rect = um.layout.region("sphere")
        um.grid.data[rect.y0, rect.x0, :] = 7.5
        assert np.all(views["sphere"].data[0, 0, :] == 7.5)
        for name, r in um.layout.entries:
            assert views[name].data.shape == (r.h, r.w, 3)
            assert np.shares_memory(views[name].data, um.grid.data)

    def test_view_sampling_equals_copy(self):
        um = unified_noise_map(area_biased_layout_31(64), channels=2, seed=9)
        views = split(um)
        copied = FeatureGrid(views["xy"].data.copy())
        u = np.linspace(-1, 1, 37)
        v = np.linspace(-1, 1, 37)[::-1]
        assert np.abs(sample_bilinear(views["xy"], u, v) - sample_bilinear(copied, u, v)).max() < 1e-12

    def test_freeze_blocks_writes(self):
        um = unified_noise_map(even_layout(8, EVEN_NAMES[Variant.HY_PLANE_22]), channels=1, seed=2)
        um.freeze()
        with pytest.raises(ValueError):
            um.grid.data[0, 0, 0] = 1.0
        # views taken after the freeze are read-only too
        views = split(um)
        with pytest.raises(ValueError):
            views["xy"].data[0, 0, 0] = 1.0


class TestBuild:
    def test_even_31_builds_hyplane31(self):
        um = unified_noise_map(even_layout(32, EVEN_NAMES[Variant.HY_PLANE_31]), channels=4, seed=3)
        rep = build(um, Variant.HY_PLANE_31)
        assert isinstance(rep, HyPlane31)
        assert rep.sphere.kind is WarpKind.LAEA_ELLIPTICAL
        assert np.shares_memory(rep.sphere.grid.data, um.grid.data)

    def test_area_biased_22_builds_cap(self):
        um = unified_noise_map(area_biased_layout_22(64, cap_fraction=0.25), channels=4, seed=7)
        rep = build(um, Variant.HY_PLANE_22)
        assert isinstance(rep, HyPlane22)
        assert rep.sphere_b.cap_angle == pytest.approx(0.25 * np.pi)
        # cap support is centered on the big sphere's opened pole (+z)
        pole = np.array([0.0, 0.0, 1.0])
        from hyplane.geometry import cartesian_to_dir

        assert float(cartesian_to_dir(pole, rep.sphere_b.frame).theta) == 0.0

    def test_triplane_names_build_triplane(self):
        um = unified_noise_map(even_layout(32, EVEN_NAMES[Variant.TRI_PLANE]), channels=4, seed=11)
        rep = build(um, Variant.TRI_PLANE)
        assert isinstance(rep, TriPlane)
        # the filler quadrant stays out of the representation
        assert UNUSED in um.layout.names()

    def test_name_mismatch_lists_missing_and_extra(self):
        um = unified_noise_map(even_layout(32, EVEN_NAMES[Variant.HY_PLANE_22]), channels=4, seed=13)
        with pytest.raises(ValueError) as err:
            build(um, Variant.HY_PLANE_31)
        assert "missing" in str(err.value) and "sphere" in str(err.value)
        assert "extra" in str(err.value) and "sphere_a" in str(err.value)

    def test_build_split_build_idempotent_structure(self):
        um = unified_noise_map(area_biased_layout_22(64), channels=2, seed=17)
        rep1 = build(um, Variant.HY_PLANE_22)
        rep2 = build(um, Variant.HY_PLANE_22)
        assert np.shares_memory(rep1.xy.grid.data, rep2.xy.grid.data)
        assert rep1.sphere_a.frame == rep2.sphere_a.frame
        assert rep1.sphere_b.cap_angle == rep2.sphere_b.cap_angle
        assert rep1.xy.grid.data.shape == rep2.xy.grid.data.shape

    def test_unified_build_feeds_query(self):
        um = unified_noise_map(even_layout(32, EVEN_NAMES[Variant.SPHERICAL_TRI_PLANE]), channels=4, seed=19)
        rep = build(um, Variant.SPHERICAL_TRI_PLANE)
        out = component_features(rep, np.array([0.3, 0.4, 0.5]))
        assert set(out) == {"dominant", "radius_colat", "radius_lon"}


class TestRect:
    def test_validation(self):
        with pytest.raises(ValueError):
            Rect(0, 0, 1, 4)
        with pytest.raises(ValueError, match="exceeds"):
            RegionLayout(8, 8, (("a", Rect(0, 0, 16, 16)),))
        with pytest.raises(ValueError, match="unique"):
            RegionLayout(8, 8, (("a", Rect(0, 0, 4, 8)), ("a", Rect(4, 0, 4, 8))))


def test_layout_entries_json_schema():
    layout = area_biased_layout_22(64)
    entries = layout_entries_json(layout, WarpKind.LAEA_ELLIPTICAL)
    by_name = {e["name"]: e for e in entries}
    assert by_name["sphere_a"]["kind"] == "spherical"
    assert by_name["sphere_a"]["frame"]["north"] == [0.0, 0.0, -1.0]
    assert by_name["xy"]["kind"] == "planar"
    assert by_name["xy"]["rect"]["w"] == 48
    assert by_name["sphere_b"]["warp"] == "elliptical"


def test_random_representation_variants():
    for variant in Variant:
        rep = random_representation(variant, size=32, channels=4, seed=23)
        pts = np.array([[0.2, 0.3, 0.4], [-0.1, 0.5, -0.6]])
        from hyplane.representation import query

        out = query(rep, pts)
        assert out.shape == (2, 4)
    with pytest.raises(ValueError, match="area-biased"):
        random_representation(Variant.TRI_PLANE, size=32, layout_kind="area-biased")
