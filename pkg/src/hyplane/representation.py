"""The six plane arrangements behind a single query(point) -> feature entry point.

Aggregation across constituent planes is the arithmetic mean, which keeps
feature magnitudes comparable between variants with different plane counts.
The two spheres of a 2+2 arrangement are first blended into one spherical
feature (distance-from-pole weighting) before entering the mean; a dual
spherical tri-plane blends its two tri-plane aggregates the same way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .geometry import SphereFrame, UP_FRAME, cartesian_to_dir
from .plane import (
    FeatureGrid,
    PlanarPlane,
    SphericalPlane,
    read_grid,
    sample_bilinear,
    sample_planar,
    sample_spherical,
    write_grid,
)
from .warp import WarpKind

# radial coordinate of the spherical tri-plane is normalized by the cube
# diagonal so every in-cube point lands inside [-1, 1]
RADIUS_MAX = float(np.sqrt(3.0))

_FRAME_TOL = 1e-12


@dataclass(frozen=True)
class TriPlane:
    """Three axis-aligned planes queried by Cartesian projection."""

    xy: PlanarPlane
    xz: PlanarPlane
    yz: PlanarPlane

    def __post_init__(self):
        _check_axes(self, xy="xy", xz="xz", yz="yz")
        _check_channels(self.xy.grid, self.xz.grid, self.yz.grid)


@dataclass(frozen=True)
class TriGrid:
    """Tri-plane with D parallel sheets per orientation, interpolated in depth.

    ``xy[k]`` sits at z = depths[k], ``xz[k]`` at y = depths[k], ``yz[k]``
    at x = depths[k]; depths are ascending within [-1, 1].
    """

    xy: tuple[FeatureGrid, ...]
    xz: tuple[FeatureGrid, ...]
    yz: tuple[FeatureGrid, ...]
    depths: tuple[float, ...]

    def __post_init__(self):
        d = len(self.depths)
        if d < 1 or any(len(s) != d for s in (self.xy, self.xz, self.yz)):
            raise ValueError("each orientation needs one sheet per depth")
        if any(self.depths[k] >= self.depths[k + 1] for k in range(d - 1)):
            raise ValueError("depths must be strictly ascending")
        if min(self.depths) < -1.0 or max(self.depths) > 1.0:
            raise ValueError("depths must lie in [-1, 1]")
        _check_channels(*self.xy, *self.xz, *self.yz)


@dataclass(frozen=True)
class SphericalTriPlane:
    """Direction-dominant plane plus two (radius, angle) side planes."""

    dominant: SphericalPlane
    radius_colat: FeatureGrid
    radius_lon: FeatureGrid

    def __post_init__(self):
        _check_channels(self.dominant.grid, self.radius_colat, self.radius_lon)


@dataclass(frozen=True)
class DualSphericalTriPlane:
    """Two spherical tri-planes with orthogonal polar axes, blended by disc radius."""

    first: SphericalTriPlane
    second: SphericalTriPlane

    def __post_init__(self):
        n1 = self.first.dominant.frame.north
        n2 = self.second.dominant.frame.north
        if abs(float(n1 @ n2)) > _FRAME_TOL:
            raise ValueError("dual tri-plane frames must be orthogonal")
        _check_channels(self.first.dominant.grid, self.second.dominant.grid)


@dataclass(frozen=True)
class HyPlane31:
    """Three planar planes plus one spherical plane opening downward (-y)."""

    xy: PlanarPlane
    xz: PlanarPlane
    yz: PlanarPlane
    sphere: SphericalPlane

    def __post_init__(self):
        _check_axes(self, xy="xy", xz="xz", yz="yz")
        if not np.array_equal(self.sphere.frame.north, UP_FRAME.north):
            raise ValueError("the 3+1 sphere must have its polar axis along +y")
        _check_channels(self.xy.grid, self.xz.grid, self.yz.grid, self.sphere.grid)


@dataclass(frozen=True)
class HyPlane22:
    """Two planar planes plus two spherical planes with opposing poles.

    ``sphere_b`` may be a cap covering the opened pole of ``sphere_a``.
    """

    xy: PlanarPlane
    yz: PlanarPlane
    sphere_a: SphericalPlane
    sphere_b: SphericalPlane

    def __post_init__(self):
        _check_axes(self, xy="xy", yz="yz")
        if not np.array_equal(self.sphere_a.frame.north, -self.sphere_b.frame.north):
            raise ValueError("the two sphere frames must be exactly antipodal")
        if self.sphere_a.cap_angle is not None:
            raise ValueError("only sphere_b may be a cap")
        _check_channels(self.xy.grid, self.yz.grid, self.sphere_a.grid, self.sphere_b.grid)


Representation = Union[TriPlane, TriGrid, SphericalTriPlane, DualSphericalTriPlane, HyPlane31, HyPlane22]


def _check_axes(rep, **expected: str) -> None:
    for field, axes in expected.items():
        plane = getattr(rep, field)
        if plane.axes != axes:
            raise ValueError(f"{field} plane must project onto {axes!r}, got {plane.axes!r}")


def _check_channels(*grids: FeatureGrid) -> None:
    counts = {g.channels for g in grids}
    if len(counts) != 1:
        raise ValueError(f"all member grids must share one channel count, got {sorted(counts)}")


def channels(rep: Representation) -> int:
    if isinstance(rep, (TriPlane, HyPlane31, HyPlane22)):
        return rep.xy.grid.channels
    if isinstance(rep, TriGrid):
        return rep.xy[0].channels
    if isinstance(rep, SphericalTriPlane):
        return rep.dominant.grid.channels
    return rep.first.dominant.grid.channels


def blend_dual_sphere(
    f_a: np.ndarray,
    f_b: np.ndarray,
    radius_a: np.ndarray,
    radius_b: np.ndarray,
    radius_max_a: float = 2.0,
    radius_max_b: float = 2.0,
) -> np.ndarray:
    """Weighted mix of two spherical features by flattened-disc radius.

    Weights are (radius_max - radius)^2: largest at each sphere's projection
    center, zero on its opened rim, so each sphere's smooth center covers
    the other's problem region.  A cap uses its own smaller rim radius and
    contributes nothing beyond its support.
    """
    w_a = np.square(np.maximum(radius_max_a - np.asarray(radius_a, dtype=np.float64), 0.0))
    w_b = np.square(np.maximum(radius_max_b - np.asarray(radius_b, dtype=np.float64), 0.0))
    denom = w_a + w_b
    if np.any(denom == 0.0):
        raise ValueError("degenerate blend")
    return (w_a[..., None] * f_a + w_b[..., None] * f_b) / denom[..., None]


def _sample_sheets(sheets: tuple[FeatureGrid, ...], depths: tuple[float, ...], u, v, w) -> np.ndarray:
    """Bilinear in-plane, linear along depth, clamped at the outer sheets."""
    if len(sheets) == 1:
        return sample_bilinear(sheets[0], u, v)
    d = np.asarray(depths, dtype=np.float64)
    w = np.clip(np.asarray(w, dtype=np.float64), d[0], d[-1])
    hi = np.clip(np.searchsorted(d, w, side="right"), 1, len(d) - 1)
    lo = hi - 1
    t = (w - d[lo]) / (d[hi] - d[lo])
    stack = np.stack([sample_bilinear(s, u, v) for s in sheets])
    flat_lo = np.take_along_axis(stack, lo[None, ..., None], axis=0)[0]
    flat_hi = np.take_along_axis(stack, hi[None, ..., None], axis=0)[0]
    return flat_lo * (1.0 - t)[..., None] + flat_hi * t[..., None]


def _sphere_tri_components(stp: SphericalTriPlane, points: np.ndarray) -> dict[str, np.ndarray]:
    p = np.asarray(points, dtype=np.float64)
    d = cartesian_to_dir(p, stp.dominant.frame)
    r = np.linalg.norm(p, axis=-1)
    u_r = 2.0 * np.minimum(r, RADIUS_MAX) / RADIUS_MAX - 1.0
    v_colat = 2.0 * d.theta / np.pi - 1.0
    v_lon = d.phi / np.pi
    return {
        "dominant": sample_spherical(stp.dominant, p),
        "radius_colat": sample_bilinear(stp.radius_colat, u_r, v_colat),
        "radius_lon": sample_bilinear(stp.radius_lon, u_r, v_lon),
    }


def _disc_radius_on(frame: SphereFrame, points: np.ndarray) -> np.ndarray:
    theta = cartesian_to_dir(points, frame).theta
    return 2.0 * np.sin(theta / 2.0)


def component_features(rep: Representation, points: np.ndarray) -> dict[str, np.ndarray]:
    """Per-constituent features exactly as they enter the aggregate."""
    p = np.asarray(points, dtype=np.float64)
    if isinstance(rep, TriPlane):
        return {
            "xy": sample_planar(rep.xy, p),
            "xz": sample_planar(rep.xz, p),
            "yz": sample_planar(rep.yz, p),
        }
    if isinstance(rep, TriGrid):
        q = np.clip(p, -1.0, 1.0)
        return {
            "xy": _sample_sheets(rep.xy, rep.depths, q[..., 0], q[..., 1], q[..., 2]),
            "xz": _sample_sheets(rep.xz, rep.depths, q[..., 0], q[..., 2], q[..., 1]),
            "yz": _sample_sheets(rep.yz, rep.depths, q[..., 1], q[..., 2], q[..., 0]),
        }
    if isinstance(rep, SphericalTriPlane):
        return _sphere_tri_components(rep, p)
    if isinstance(rep, DualSphericalTriPlane):
        agg_a = np.mean(list(_sphere_tri_components(rep.first, p).values()), axis=0)
        agg_b = np.mean(list(_sphere_tri_components(rep.second, p).values()), axis=0)
        return {"first": agg_a, "second": agg_b}
    if isinstance(rep, HyPlane31):
        return {
            "xy": sample_planar(rep.xy, p),
            "xz": sample_planar(rep.xz, p),
            "yz": sample_planar(rep.yz, p),
            "sphere": sample_spherical(rep.sphere, p),
        }
    if isinstance(rep, HyPlane22):
        f_a = sample_spherical(rep.sphere_a, p)
        f_b = sample_spherical(rep.sphere_b, p)
        blended = blend_dual_sphere(
            f_a,
            f_b,
            _disc_radius_on(rep.sphere_a.frame, p),
            _disc_radius_on(rep.sphere_b.frame, p),
            rep.sphere_a.disc_radius,
            rep.sphere_b.disc_radius,
        )
        return {
            "xy": sample_planar(rep.xy, p),
            "yz": sample_planar(rep.yz, p),
            "sphere": blended,
        }
    raise TypeError(f"not a representation: {type(rep).__name__}")


def query(rep: Representation, points: np.ndarray) -> np.ndarray:
    """Feature vector(s) for point(s) in the unit cube, shape (..., C)."""
    parts = component_features(rep, points)
    if isinstance(rep, DualSphericalTriPlane):
        p = np.asarray(points, dtype=np.float64)
        return blend_dual_sphere(
            parts["first"],
            parts["second"],
            _disc_radius_on(rep.first.dominant.frame, p),
            _disc_radius_on(rep.second.dominant.frame, p),
        )
    return np.mean(list(parts.values()), axis=0)


@dataclass(frozen=True)
class MirrorPair:
    """query() results at a point and its z-reflection, with the per-plane split."""

    feature: np.ndarray
    mirrored: np.ndarray
    components: dict[str, tuple[np.ndarray, np.ndarray]]


def mirror_pair_features(rep: Representation, points: np.ndarray) -> MirrorPair:
    """Features at points and at their z-reflections, broken down per plane."""
    p = np.asarray(points, dtype=np.float64)
    m = p.copy()
    m[..., 2] = -m[..., 2]
    parts = component_features(rep, p)
    parts_m = component_features(rep, m)
    return MirrorPair(
        feature=query(rep, p),
        mirrored=query(rep, m),
        components={k: (parts[k], parts_m[k]) for k in parts},
    )


# ---------------------------------------------------------------------------
# on-disk bundle: one HYPL file per grid plus a JSON manifest


def _plane_entries(rep: Representation) -> list[dict]:
    def planar(name, plane):
        return {"name": name, "type": "planar", "axes": plane.axes, "grid": f"{name}.hypl"}

    def spherical(name, sp):
        return {
            "name": name,
            "type": "spherical",
            "warp": sp.kind.value,
            "north": [float(x) for x in sp.frame.north],
            "ref_azimuth": [float(x) for x in sp.frame.ref_azimuth],
            "cap_angle": sp.cap_angle,
            "grid": f"{name}.hypl",
        }

    def raw(name):
        return {"name": name, "type": "grid", "grid": f"{name}.hypl"}

    if isinstance(rep, TriPlane):
        return [planar(n, getattr(rep, n)) for n in ("xy", "xz", "yz")]
    if isinstance(rep, TriGrid):
        out = []
        for orient in ("xy", "xz", "yz"):
            for k in range(len(rep.depths)):
                out.append(raw(f"{orient}_{k}"))
        return out
    if isinstance(rep, SphericalTriPlane):
        return [spherical("dominant", rep.dominant), raw("radius_colat"), raw("radius_lon")]
    if isinstance(rep, DualSphericalTriPlane):
        out = []
        for tag, stp in (("first", rep.first), ("second", rep.second)):
            out.append(spherical(f"{tag}_dominant", stp.dominant))
            out.append(raw(f"{tag}_radius_colat"))
            out.append(raw(f"{tag}_radius_lon"))
        return out
    if isinstance(rep, HyPlane31):
        return [planar(n, getattr(rep, n)) for n in ("xy", "xz", "yz")] + [spherical("sphere", rep.sphere)]
    if isinstance(rep, HyPlane22):
        return [
            planar("xy", rep.xy),
            planar("yz", rep.yz),
            spherical("sphere_a", rep.sphere_a),
            spherical("sphere_b", rep.sphere_b),
        ]
    raise TypeError(f"not a representation: {type(rep).__name__}")


def _grids_by_name(rep: Representation) -> dict[str, FeatureGrid]:
    if isinstance(rep, TriPlane):
        return {"xy": rep.xy.grid, "xz": rep.xz.grid, "yz": rep.yz.grid}
    if isinstance(rep, TriGrid):
        out = {}
        for orient in ("xy", "xz", "yz"):
            for k, g in enumerate(getattr(rep, orient)):
                out[f"{orient}_{k}"] = g
        return out
    if isinstance(rep, SphericalTriPlane):
        return {"dominant": rep.dominant.grid, "radius_colat": rep.radius_colat, "radius_lon": rep.radius_lon}
    if isinstance(rep, DualSphericalTriPlane):
        out = {}
        for tag, stp in (("first", rep.first), ("second", rep.second)):
            out[f"{tag}_dominant"] = stp.dominant.grid
            out[f"{tag}_radius_colat"] = stp.radius_colat
            out[f"{tag}_radius_lon"] = stp.radius_lon
        return out
    if isinstance(rep, HyPlane31):
        return {"xy": rep.xy.grid, "xz": rep.xz.grid, "yz": rep.yz.grid, "sphere": rep.sphere.grid}
    return {"xy": rep.xy.grid, "yz": rep.yz.grid, "sphere_a": rep.sphere_a.grid, "sphere_b": rep.sphere_b.grid}


_VARIANT_TAGS = {
    TriPlane: "tri-plane",
    TriGrid: "tri-grid",
    SphericalTriPlane: "spherical-tri-plane",
    DualSphericalTriPlane: "dual-spherical-tri-plane",
    HyPlane31: "hy-plane-31",
    HyPlane22: "hy-plane-22",
}


def save_representation(rep: Representation, directory, layout_entries: list[dict] | None = None) -> None:
    """Write a bundle directory: manifest.json plus one HYPL file per grid."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": "hyplane-bundle",
        "version": 1,
        "variant": _VARIANT_TAGS[type(rep)],
        "channels": channels(rep),
        "planes": _plane_entries(rep),
    }
    if isinstance(rep, TriGrid):
        manifest["depths"] = [float(x) for x in rep.depths]
    if layout_entries is not None:
        manifest["layout"] = layout_entries
    for name, grid in _grids_by_name(rep).items():
        write_grid(directory / f"{name}.hypl", grid)
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_spherical(entry: dict, grids: dict[str, FeatureGrid]) -> SphericalPlane:
    frame = SphereFrame(np.array(entry["north"]), np.array(entry["ref_azimuth"]))
    return SphericalPlane(
        frame=frame,
        kind=WarpKind(entry["warp"]),
        grid=grids[entry["name"]],
        cap_angle=entry.get("cap_angle"),
    )


def load_representation(directory) -> Representation:
    """Rebuild a representation from a bundle directory."""
    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "hyplane-bundle":
        raise ValueError("not a hyplane bundle")
    entries = {e["name"]: e for e in manifest["planes"]}
    grids = {name: read_grid(directory / e["grid"]) for name, e in entries.items()}
    variant = manifest["variant"]
    if variant == "tri-plane":
        return TriPlane(*(PlanarPlane(entries[n]["axes"], grids[n]) for n in ("xy", "xz", "yz")))
    if variant == "tri-grid":
        depths = tuple(manifest["depths"])
        sheets = {
            orient: tuple(grids[f"{orient}_{k}"] for k in range(len(depths)))
            for orient in ("xy", "xz", "yz")
        }
        return TriGrid(sheets["xy"], sheets["xz"], sheets["yz"], depths)
    if variant == "spherical-tri-plane":
        return SphericalTriPlane(
            _load_spherical(entries["dominant"], grids), grids["radius_colat"], grids["radius_lon"]
        )
    if variant == "dual-spherical-tri-plane":
        halves = []
        for tag in ("first", "second"):
            halves.append(
                SphericalTriPlane(
                    _load_spherical(entries[f"{tag}_dominant"], grids),
                    grids[f"{tag}_radius_colat"],
                    grids[f"{tag}_radius_lon"],
                )
            )
        return DualSphericalTriPlane(*halves)
    if variant == "hy-plane-31":
        return HyPlane31(
            *(PlanarPlane(entries[n]["axes"], grids[n]) for n in ("xy", "xz", "yz")),
            _load_spherical(entries["sphere"], grids),
        )
    if variant == "hy-plane-22":
        return HyPlane22(
            PlanarPlane("xy", grids["xy"]),
            PlanarPlane("yz", grids["yz"]),
            _load_spherical(entries["sphere_a"], grids),
            _load_spherical(entries["sphere_b"], grids),
        )
    raise ValueError(f"unknown variant {variant!r}")
