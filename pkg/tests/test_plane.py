import numpy as np
import pytest

from hyplane.geometry import SphericalDir, UP_FRAME, dir_to_cartesian
from hyplane.plane import (
    FeatureGrid,
    PlanarPlane,
    SphericalPlane,
    constant_grid,
    direction_uv,
    noise_grid,
    read_grid,
    sample_bilinear,
    sample_planar,
    sample_spherical,
    write_grid,
)
from hyplane.prng import normal, uniform_sym
from hyplane.warp import WarpKind


def reference_bilinear(grid, u, v):
    """Scalar brute-force sampler used as the independent oracle."""
    data = grid.data.astype(np.float64)
    h, w, c = data.shape
    u = min(max(float(u), -1.0), 1.0)
    v = min(max(float(v), -1.0), 1.0)
    col = (u + 1.0) / 2.0 * (w - 1)
    row = (v + 1.0) / 2.0 * (h - 1)
    c0 = min(int(np.floor(col)), w - 2)
    r0 = min(int(np.floor(row)), h - 2)
    fc, fr = col - c0, row - r0
    out = np.zeros(c)
    for dr, dc, wgt in ((0, 0, (1 - fr) * (1 - fc)), (0, 1, (1 - fr) * fc), (1, 0, fr * (1 - fc)), (1, 1, fr * fc)):
        out += wgt * data[r0 + dr, c0 + dc]
    return out


TINY = FeatureGrid(np.array([[[0.0], [1.0]], [[2.0], [3.0]]], dtype=np.float32))  # rows bottom-to-top


class TestBilinear:
    def test_corner_texels(self):
        assert float(sample_bilinear(TINY, -1.0, -1.0)[0]) == 0.0
        assert float(sample_bilinear(TINY, 1.0, -1.0)[0]) == 1.0
        assert float(sample_bilinear(TINY, -1.0, 1.0)[0]) == 2.0
        assert float(sample_bilinear(TINY, 1.0, 1.0)[0]) == 3.0

    def test_center_blend(self):
        assert float(sample_bilinear(TINY, 0.0, 0.0)[0]) == 1.5

    def test_clamp_matches_edge_exactly(self):
        g = noise_grid(5, 7, 3, seed=2)
        v = uniform_sym(3, 0, 50)
        outside = sample_bilinear(g, np.full(50, 1.7), v)
        edge = sample_bilinear(g, np.ones(50), v)
        assert np.array_equal(outside, edge)
        outside = sample_bilinear(g, v, np.full(50, -2.0))
        edge = sample_bilinear(g, v, -np.ones(50))
        assert np.array_equal(outside, edge)

    def test_matches_reference_sampler(self):
        g = noise_grid(6, 9, 4, seed=11)
        us = uniform_sym(13, 0, 200, stride=2, offset=0) * 1.2
        vs = uniform_sym(13, 0, 200, stride=2, offset=1) * 1.2
        got = sample_bilinear(g, us, vs)
        want = np.stack([reference_bilinear(g, u, v) for u, v in zip(us, vs)])
        assert np.abs(got - want).max() < 1e-6

    def test_lipschitz_bound(self):
        g = noise_grid(16, 16, 2, seed=5)
        data = g.data.astype(np.float64)
        max_adjacent = max(
            np.abs(np.diff(data, axis=0)).max(), np.abs(np.diff(data, axis=1)).max()
        )
        u = uniform_sym(7, 0, 500, stride=4, offset=0)
        v = uniform_sym(7, 0, 500, stride=4, offset=1)
        du = uniform_sym(7, 0, 500, stride=4, offset=2) * 0.05
        dv = uniform_sym(7, 0, 500, stride=4, offset=3) * 0.05
        f1 = sample_bilinear(g, u, v)
        f2 = sample_bilinear(g, u + du, v + dv)
        # per-channel change bounded by texel-unit step times max adjacent gap
        steps = (np.abs(du) * (16 - 1) / 2 + np.abs(dv) * (16 - 1) / 2)
        assert np.all(np.abs(f2 - f1).max(axis=-1) <= steps * max_adjacent + 1e-12)

    def test_grid_validation(self):
        with pytest.raises(ValueError, match="at least 2x2"):
            FeatureGrid(np.zeros((1, 4, 2), dtype=np.float32))
        with pytest.raises(ValueError, match="finite"):
            FeatureGrid(np.full((2, 2, 1), np.nan, dtype=np.float32))
        with pytest.raises(ValueError, match="float32 or float64"):
            FeatureGrid(np.zeros((2, 2, 1), dtype=np.int32))


class TestPlanar:
    def test_projection_discards_third_coordinate(self):
        pl = PlanarPlane("xy", noise_grid(8, 8, 4, seed=3))
        a = sample_planar(pl, np.array([0.3, -0.2, 0.7]))
        b = sample_planar(pl, np.array([0.3, -0.2, -0.7]))
        assert np.array_equal(a, b)

    def test_constant_grid(self):
        pl = PlanarPlane("xz", constant_grid(4, 4, 3, 2.5))
        pts = uniform_sym(9, 0, 60).reshape(20, 3)
        assert np.allclose(sample_planar(pl, pts), 2.5)

    def test_matches_reference(self):
        pl = PlanarPlane("yz", noise_grid(7, 5, 2, seed=13))
        pts = uniform_sym(15, 0, 300).reshape(100, 3) * 1.1
        got = sample_planar(pl, pts)
        clipped = np.clip(pts, -1, 1)
        want = np.stack([reference_bilinear(pl.grid, p[1], p[2]) for p in clipped])
        assert np.abs(got - want).max() < 1e-6

    def test_axes_validation(self):
        with pytest.raises(ValueError, match="axes"):
            PlanarPlane("xx", constant_grid(2, 2, 1))


class TestSpherical:
    def test_radial_projection(self):
        sp = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, noise_grid(16, 16, 4, seed=21))
        p = np.array([0.25, -0.125, 0.5])
        assert np.array_equal(sample_spherical(sp, p), sample_spherical(sp, 2.0 * p))

    def test_north_pole_hits_center_neighborhood(self):
        g = noise_grid(16, 16, 1, seed=23)
        sp = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, g)
        val = sample_spherical(sp, UP_FRAME.north)
        center4 = g.data[7:9, 7:9, 0].astype(np.float64)
        assert float(val[0]) == pytest.approx(center4.mean(), abs=1e-12)

    def test_zero_point_rejected(self):
        sp = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, noise_grid(4, 4, 1, seed=1))
        with pytest.raises(ValueError, match="degenerate direction"):
            sample_spherical(sp, np.zeros(3))

    def test_antipodal_points_differ(self):
        hits = 0
        trials = 1000
        for k in range(trials):
            g = noise_grid(8, 8, 2, seed=1000 + k)
            sp = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, g)
            p = uniform_sym(2000 + k, 0, 3)
            if np.linalg.norm(p) < 1e-3:
                p = np.array([0.4, 0.3, 0.2])
            fa = sample_spherical(sp, p)
            fb = sample_spherical(sp, -p)
            hits += int(np.any(fa != fb))
        assert hits >= 0.99 * trials

    def test_seam_continuity_by_kind(self):
        g = noise_grid(32, 32, 8, seed=27)
        delta = 1e-4
        theta = np.full(200, np.pi / 2) + uniform_sym(29, 0, 200) * 0.5
        half = delta / (2.0 * np.sin(theta))
        a = dir_to_cartesian(SphericalDir(theta, np.pi - half), UP_FRAME)
        b = dir_to_cartesian(SphericalDir(theta, -np.pi + half), UP_FRAME)
        smooth = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, g)
        gap = np.linalg.norm(sample_spherical(smooth, a) - sample_spherical(smooth, b), axis=-1)
        assert gap.max() < 1e-2
        torn = SphericalPlane(UP_FRAME, WarpKind.NAIVE_THETA_PHI, g)
        gap = np.linalg.norm(sample_spherical(torn, a) - sample_spherical(torn, b), axis=-1)
        assert np.median(gap) > 1.0

    def test_cap_plane(self):
        with pytest.raises(ValueError, match="LAEA"):
            SphericalPlane(UP_FRAME, WarpKind.NAIVE_THETA_PHI, noise_grid(4, 4, 1, seed=1), cap_angle=0.5)
        cap = SphericalPlane(UP_FRAME, WarpKind.LAEA_ELLIPTICAL, noise_grid(8, 8, 1, seed=2), cap_angle=np.pi / 4)
        assert cap.disc_radius == pytest.approx(2 * np.sin(np.pi / 8))
        # directions beyond the cap clamp onto its rim
        inside_rim = direction_uv(cap, SphericalDir(np.pi / 4, 0.3))
        outside = direction_uv(cap, SphericalDir(np.pi / 2, 0.3))
        assert np.hypot(*inside_rim) == pytest.approx(np.hypot(*outside), abs=1e-12)


class TestGridFile:
    def test_round_trip_bit_exact(self, tmp_path):
        g = noise_grid(5, 9, 3, seed=33)
        path = tmp_path / "grid.hypl"
        write_grid(path, g)
        back = read_grid(path)
        assert back.data.dtype == np.float32
        assert np.array_equal(back.data, g.data)
        # second write produces identical bytes
        write_grid(tmp_path / "again.hypl", back)
        assert (tmp_path / "again.hypl").read_bytes() == path.read_bytes()

    def test_header_layout(self, tmp_path):
        g = constant_grid(2, 3, 4, 1.0)
        path = tmp_path / "g.hypl"
        write_grid(path, g)
        raw = path.read_bytes()
        assert raw[:4] == b"HYPL"
        assert raw[4:20] == (1).to_bytes(4, "little") + (2).to_bytes(4, "little") + (3).to_bytes(4, "little") + (4).to_bytes(4, "little")
        assert len(raw) == 20 + 4 * 2 * 3 * 4

    def test_bad_files_rejected(self, tmp_path):
        p = tmp_path / "bad"
        p.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(ValueError, match="magic"):
            read_grid(p)
        g = constant_grid(2, 2, 1)
        write_grid(tmp_path / "t.hypl", g)
        data = (tmp_path / "t.hypl").read_bytes()
        (tmp_path / "trunc.hypl").write_bytes(data[:-4])
        with pytest.raises(ValueError, match="truncated"):
            read_grid(tmp_path / "trunc.hypl")


def test_noise_grid_deterministic():
    a = noise_grid(4, 4, 2, seed=7)
    b = noise_grid(4, 4, 2, seed=7)
    assert np.array_equal(a.data, b.data)
    c = noise_grid(4, 4, 2, seed=8)
    assert not np.array_equal(a.data, c.data)
    flat = normal(7, 0, 32).astype(np.float32)
    assert np.array_equal(a.data.ravel(), flat)
