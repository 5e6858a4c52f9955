"""Unify-split: one shared feature map, spatially partitioned into named planes.

All planes of a representation occupy disjoint rectangles of a single
(H, W, C) map; splitting hands out numpy views of the shared storage, so a
write through the unified map is visible through the matching view and no
feature data is ever copied.  Freeze the map before sharing across threads.

Built-in layouts: the even two-by-two split, and an area-biased split that
gives the sphere a dominant square region, elongates two planar maps along
opposite axes, and leaves the smallest square to the remaining plane.  At
size 512 the area-biased partition is 384x384, 384x128, 128x384, 128x128.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import BACK_FRAME, FRONT_FRAME, SphereFrame, UP_FRAME
from .plane import DEFAULT_CHANNELS, FeatureGrid, PlanarPlane, SphericalPlane, noise_grid
from .representation import (
    DualSphericalTriPlane,
    HyPlane22,
    HyPlane31,
    Representation,
    SphericalTriPlane,
    TriGrid,
    TriPlane,
)
from .warp import WarpKind

# regions with this name are layout filler and are skipped when building
UNUSED = "unused"

DEFAULT_CAP_FRACTION = 0.25


class Variant(str, Enum):
    TRI_PLANE = "tri-plane"
    TRI_GRID = "tri-grid"
    SPHERICAL_TRI_PLANE = "spherical-tri-plane"
    DUAL_SPHERICAL_TRI_PLANE = "dual-spherical-tri-plane"
    HY_PLANE_31 = "hy-plane-31"
    HY_PLANE_22 = "hy-plane-22"


@dataclass(frozen=True)
class Rect:
    """Texel-unit rectangle: column/row offset plus width/height."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if min(self.x0, self.y0) < 0 or self.w < 2 or self.h < 2:
            raise ValueError(f"bad rect {self}")

    @property
    def area(self) -> int:
        return self.w * self.h


@dataclass(frozen=True)
class RegionLayout:
    """Named rectangles tiling one unified map."""

    height: int
    width: int
    entries: tuple[tuple[str, Rect], ...]
    cap_fraction: float | None = None

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("region names must be unique")
        for name, r in self.entries:
            if r.x0 + r.w > self.width or r.y0 + r.h > self.height:
                raise ValueError(f"region {name!r} exceeds the map")

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def region(self, name: str) -> Rect:
        for n, r in self.entries:
            if n == name:
                return r
        raise KeyError(name)

    def coverage_counts(self) -> np.ndarray:
        """How many regions claim each texel; exact tiling means all ones."""
        counts = np.zeros((self.height, self.width), dtype=np.int32)
        for _, r in self.entries:
            counts[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w] += 1
        return counts

    def is_exact_tiling(self) -> bool:
        return bool(np.all(self.coverage_counts() == 1))


EVEN_NAMES = {
    Variant.HY_PLANE_31: ("sphere", "xy", "xz", "yz"),
    Variant.HY_PLANE_22: ("sphere_a", "sphere_b", "xy", "yz"),
    Variant.TRI_PLANE: ("xy", "xz", "yz", UNUSED),
    Variant.SPHERICAL_TRI_PLANE: ("dominant", "radius_colat", "radius_lon", UNUSED),
}


def even_layout(size: int, names: tuple[str, str, str, str]) -> RegionLayout:
    """Two-by-two split into equal quadrants, named in reading order."""
    if len(names) != 4:
        raise ValueError("even_layout splits into exactly four regions")
    if size % 2 != 0:
        raise ValueError("size must be divisible by 2")
    half = size // 2
    if half < 2:
        raise ValueError("size too small")
    rects = [Rect(0, 0, half, half), Rect(half, 0, half, half), Rect(0, half, half, half), Rect(half, half, half, half)]
    return RegionLayout(size, size, tuple(zip(names, rects)))


def _biased_split(size: int) -> tuple[int, int]:
    if size < 8 or size % 2 != 0:
        raise ValueError("area-biased layouts need an even size >= 8")
    big = 2 * round(0.75 * size / 2.0)
    small = size - big
    if small < 2:
        raise ValueError("size too small for an area-biased split")
    return big, small


def area_biased_layout_31(size: int = 512) -> RegionLayout:
    """Sphere-dominant split; the two elongated planar maps run along opposite axes."""
    big, small = _biased_split(size)
    entries = (
        ("sphere", Rect(0, 0, big, big)),
        ("yz", Rect(big, 0, small, big)),
        ("xy", Rect(0, big, big, small)),
        ("xz", Rect(big, big, small, small)),
    )
    return RegionLayout(size, size, entries)


def area_biased_layout_22(size: int = 512, cap_fraction: float = DEFAULT_CAP_FRACTION) -> RegionLayout:
    """Dominant full sphere plus a small cap sphere covering its opened pole.

    cap_fraction (0, 0.5] is the cap's share of colatitude: the cap plane
    spans angles up to cap_fraction * pi around its own pole.
    """
    if not 0.0 < cap_fraction <= 0.5:
        raise ValueError("cap_fraction must lie in (0, 0.5]")
    big, small = _biased_split(size)
    entries = (
        ("sphere_a", Rect(0, 0, big, big)),
        ("yz", Rect(big, 0, small, big)),
        ("xy", Rect(0, big, big, small)),
        ("sphere_b", Rect(big, big, small, small)),
    )
    return RegionLayout(size, size, entries, cap_fraction=cap_fraction)


@dataclass(frozen=True)
class UnifiedMap:
    """One shared feature map plus the layout that partitions it."""

    grid: FeatureGrid
    layout: RegionLayout

    def __post_init__(self):
        if (self.grid.height, self.grid.width) != (self.layout.height, self.layout.width):
            raise ValueError("layout does not fit the unified grid")

    def freeze(self) -> None:
        """Make the shared storage read-only; call before sharing views."""
        self.grid.data.flags.writeable = False


def unified_noise_map(layout: RegionLayout, channels: int = DEFAULT_CHANNELS, seed: int = 0) -> UnifiedMap:
    return UnifiedMap(noise_grid(layout.height, layout.width, channels, seed), layout)


def split(um: UnifiedMap) -> dict[str, FeatureGrid]:
    """Views of the unified storage, one per region; never copies."""
    out = {}
    for name, r in um.layout.entries:
        out[name] = FeatureGrid(um.grid.data[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w, :])
    return out


_SPHERE_REGIONS = {"sphere", "sphere_a", "sphere_b", "dominant"}

_REGION_FRAMES = {
    "sphere": UP_FRAME,
    "dominant": UP_FRAME,
    "sphere_a": BACK_FRAME,
    "sphere_b": FRONT_FRAME,
}


def layout_entries_json(layout: RegionLayout, warp: WarpKind) -> list[dict]:
    """Layout description for the bundle manifest: name, rect, kind, frame."""
    out = []
    for name, r in layout.entries:
        if name in _SPHERE_REGIONS:
            kind = "spherical"
        elif name == UNUSED:
            kind = "unused"
        elif name.startswith("radius"):
            kind = "grid"
        else:
            kind = "planar"
        entry = {"name": name, "rect": {"x0": r.x0, "y0": r.y0, "w": r.w, "h": r.h}, "kind": kind}
        if kind == "spherical":
            frame = _REGION_FRAMES[name]
            entry["warp"] = warp.value
            entry["frame"] = {
                "north": [float(x) for x in frame.north],
                "ref_azimuth": [float(x) for x in frame.ref_azimuth],
            }
        out.append(entry)
    return out


_REQUIRED_NAMES = {
    Variant.TRI_PLANE: {"xy", "xz", "yz"},
    Variant.SPHERICAL_TRI_PLANE: {"dominant", "radius_colat", "radius_lon"},
    Variant.HY_PLANE_31: {"sphere", "xy", "xz", "yz"},
    Variant.HY_PLANE_22: {"sphere_a", "sphere_b", "xy", "yz"},
}

_DEFAULT_WARP = {
    Variant.TRI_PLANE: WarpKind.LAEA_ELLIPTICAL,
    Variant.SPHERICAL_TRI_PLANE: WarpKind.NAIVE_THETA_PHI,
    Variant.HY_PLANE_31: WarpKind.LAEA_ELLIPTICAL,
    Variant.HY_PLANE_22: WarpKind.LAEA_ELLIPTICAL,
}


def build(um: UnifiedMap, variant: Variant, warp: WarpKind | None = None) -> Representation:
    """Assemble a representation whose grids are views into the unified map."""
    variant = Variant(variant)
    if variant not in _REQUIRED_NAMES:
        raise ValueError(f"variant {variant.value!r} is not built from a unified map")
    required = _REQUIRED_NAMES[variant]
    present = {n for n in um.layout.names() if n != UNUSED}
    if present != required:
        missing = sorted(required - present)
        extra = sorted(present - required)
        raise ValueError(f"layout does not match {variant.value!r}: missing {missing}, extra {extra}")
    if warp is None:
        warp = _DEFAULT_WARP[variant]
    views = split(um)
    if variant is Variant.TRI_PLANE:
        return TriPlane(*(PlanarPlane(n, views[n]) for n in ("xy", "xz", "yz")))
    if variant is Variant.SPHERICAL_TRI_PLANE:
        return SphericalTriPlane(
            SphericalPlane(UP_FRAME, warp, views["dominant"]),
            views["radius_colat"],
            views["radius_lon"],
        )
    if variant is Variant.HY_PLANE_31:
        return HyPlane31(
            *(PlanarPlane(n, views[n]) for n in ("xy", "xz", "yz")),
            SphericalPlane(UP_FRAME, warp, views["sphere"]),
        )
    cap = um.layout.cap_fraction
    return HyPlane22(
        PlanarPlane("xy", views["xy"]),
        PlanarPlane("yz", views["yz"]),
        SphericalPlane(BACK_FRAME, warp, views["sphere_a"]),
        SphericalPlane(
            FRONT_FRAME, warp, views["sphere_b"], cap_angle=None if cap is None else cap * float(np.pi)
        ),
    )


def random_representation(
    variant: Variant,
    size: int = 256,
    channels: int = DEFAULT_CHANNELS,
    seed: int = 0,
    warp: WarpKind | None = None,
    layout_kind: str = "even",
    cap_fraction: float = DEFAULT_CAP_FRACTION,
    depth_count: int = 3,
) -> Representation:
    """Synthetic noise-filled representation for demos, tests and the CLI.

    Unify-split variants are built from a unified noise map under the chosen
    layout ("even" or "area-biased"); tri-grid and the dual spherical
    tri-plane use standalone per-plane grids.
    """
    variant = Variant(variant)
    if variant in _REQUIRED_NAMES:
        if layout_kind == "even":
            layout = even_layout(size, EVEN_NAMES[variant])
        elif layout_kind == "area-biased":
            if variant is Variant.HY_PLANE_31:
                layout = area_biased_layout_31(size)
            elif variant is Variant.HY_PLANE_22:
                layout = area_biased_layout_22(size, cap_fraction)
            else:
                raise ValueError(f"no area-biased layout for {variant.value!r}")
        else:
            raise ValueError(f"unknown layout kind {layout_kind!r}")
        return build(unified_noise_map(layout, channels, seed), variant, warp)
    half = size // 2
    if variant is Variant.TRI_GRID:
        depths = tuple(np.linspace(-1.0, 1.0, depth_count)) if depth_count > 1 else (0.0,)
        sheets = {}
        for i, orient in enumerate(("xy", "xz", "yz")):
            sheets[orient] = tuple(
                noise_grid(half, half, channels, seed + 1 + i * depth_count + k) for k in range(depth_count)
            )
        return TriGrid(sheets["xy"], sheets["xz"], sheets["yz"], depths)
    if variant is Variant.DUAL_SPHERICAL_TRI_PLANE:
        if warp is None:
            warp = WarpKind.NAIVE_THETA_PHI
        frames = (UP_FRAME, SphereFrame(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0])))
        halves = []
        for i, frame in enumerate(frames):
            halves.append(
                SphericalTriPlane(
                    SphericalPlane(frame, warp, noise_grid(half, half, channels, seed + 10 + 3 * i)),
                    noise_grid(half, half, channels, seed + 11 + 3 * i),
                    noise_grid(half, half, channels, seed + 12 + 3 * i),
                )
            )
        return DualSphericalTriPlane(*halves)
    raise ValueError(f"unknown variant {variant!r}")
