"""Feature-grid storage, bilinear sampling, and sampleable feature planes.

Grids are (H, W, C) arrays, row 0 at the bottom edge (v = -1).  Sampling
uses the align-corners convention (u = +/-1 maps to edge texel centers)
with clamp-to-edge addressing, so values are continuous on the closed
square without any periodic assumption.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .geometry import SphereFrame, cartesian_to_dir, SphericalDir
from .prng import normal
from .warp import DISC_RADIUS, WarpKind, disc_to_square, laea_forward, polar_to_xy, sphere_to_uv

DEFAULT_CHANNELS = 32

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

HYPL_MAGIC = b"HYPL"
HYPL_VERSION = 1


@dataclass(frozen=True)
class FeatureGrid:
    """H x W x C grid of feature values; the storage behind every plane."""

    data: np.ndarray

    def __post_init__(self):
        data = self.data
        if not isinstance(data, np.ndarray) or data.ndim != 3:
            raise ValueError("grid data must be an (H, W, C) array")
        if data.dtype not in (np.float32, np.float64):
            raise ValueError("grid data must be float32 or float64")
        h, w, c = data.shape
        if h < 2 or w < 2 or c < 1:
            raise ValueError("grid must be at least 2x2 with one channel")
        if not np.all(np.isfinite(data)):
            raise ValueError("grid data must be finite")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def constant_grid(height: int, width: int, channels: int, value: float = 0.0) -> FeatureGrid:
    return FeatureGrid(np.full((height, width, channels), value, dtype=np.float32))


def sample_bilinear(grid: FeatureGrid, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear sample at square coordinates; out-of-range inputs clamp to the edge.

    Returns (..., C) float64; exact texel values at integer texel coordinates.
    """
    data = grid.data
    h, w, _ = data.shape
    u = np.clip(np.asarray(u, dtype=np.float64), -1.0, 1.0)
    v = np.clip(np.asarray(v, dtype=np.float64), -1.0, 1.0)
    col = (u + 1.0) * 0.5 * (w - 1)
    row = (v + 1.0) * 0.5 * (h - 1)
    c0 = np.floor(col).astype(np.intp)
    r0 = np.floor(row).astype(np.intp)
    c0 = np.clip(c0, 0, w - 2)
    r0 = np.clip(r0, 0, h - 2)
    fc = (col - c0)[..., None]
    fr = (row - r0)[..., None]
    g = data.astype(np.float64, copy=False)
    bottom = g[r0, c0] * (1.0 - fc) + g[r0, c0 + 1] * fc
    top = g[r0 + 1, c0] * (1.0 - fc) + g[r0 + 1, c0 + 1] * fc
    return bottom * (1.0 - fr) + top * fr


@dataclass(frozen=True)
class PlanarPlane:
    """Feature plane indexed by two Cartesian coordinates ("xy", "xz" or "yz")."""

    axes: str
    grid: FeatureGrid

    def __post_init__(self):
        if len(self.axes) != 2 or any(a not in _AXIS_INDEX for a in self.axes) or self.axes[0] == self.axes[1]:
            raise ValueError(f"bad projection axes {self.axes!r}")

    @property
    def axis_indices(self) -> tuple[int, int]:
        return _AXIS_INDEX[self.axes[0]], _AXIS_INDEX[self.axes[1]]


def sample_planar(plane: PlanarPlane, points: np.ndarray) -> np.ndarray:
    """Sample by orthogonal projection; the third coordinate is discarded."""
    p = np.clip(np.asarray(points, dtype=np.float64), -1.0, 1.0)
    i, j = plane.axis_indices
    return sample_bilinear(plane.grid, p[..., i], p[..., j])


@dataclass(frozen=True)
class SphericalPlane:
    """Feature plane indexed by direction through a warp.

    A cap plane (cap_angle set) covers only colatitudes up to cap_angle: its
    flattened disc, radius 2*sin(cap_angle/2), is stretched onto the full
    square.  Caps require a LAEA-based warp.  Directions outside the cap
    clamp to its rim; dual-sphere blending gives them zero weight anyway.
    """

    frame: SphereFrame
    kind: WarpKind
    grid: FeatureGrid
    cap_angle: float | None = None

    def __post_init__(self):
        if self.cap_angle is not None:
            if self.kind is WarpKind.NAIVE_THETA_PHI:
                raise ValueError("cap planes require a LAEA warp")
            if not 0.0 < self.cap_angle <= np.pi:
                raise ValueError("cap_angle must lie in (0, pi]")

    @property
    def disc_radius(self) -> float:
        if self.cap_angle is None:
            return DISC_RADIUS
        return 2.0 * float(np.sin(self.cap_angle / 2.0))


def direction_uv(sp: SphericalPlane, d: SphericalDir) -> tuple[np.ndarray, np.ndarray]:
    """Square coordinates for a direction on this plane (cap-aware)."""
    if sp.cap_angle is None:
        return sphere_to_uv(d, sp.kind)
    x, y = polar_to_xy(laea_forward(d))
    rim = sp.disc_radius
    r = np.hypot(x, y)
    over = r > rim
    if np.any(over):
        shrink = np.where(over, rim / np.maximum(r, rim), 1.0)
        x = x * shrink
        y = y * shrink
    if sp.kind is WarpKind.LAEA_DISC_ONLY:
        return x / rim, y / rim
    return disc_to_square(x, y, rim)


def sample_spherical(sp: SphericalPlane, points: np.ndarray) -> np.ndarray:
    """Sample by direction only; invariant to positive scaling of points."""
    d = cartesian_to_dir(points, sp.frame)
    u, v = direction_uv(sp, d)
    return sample_bilinear(sp.grid, u, v)


def write_grid(path, grid: FeatureGrid) -> None:
    """Write the binary grid format: HYPL magic, version/H/W/C as u32 LE,
    then float32 LE values, row-major and channel-fastest."""
    h, w, c = grid.data.shape
    payload = np.ascontiguousarray(grid.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(HYPL_MAGIC)
        fh.write(struct.pack("<IIII", HYPL_VERSION, h, w, c))
        fh.write(payload)


def read_grid(path) -> FeatureGrid:
    """Read a HYPL grid file; bit-exact round-trip with write_grid."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != HYPL_MAGIC:
            raise ValueError(f"not a HYPL grid file: magic {magic!r}")
        version, h, w, c = struct.unpack("<IIII", fh.read(16))
        if version != HYPL_VERSION:
            raise ValueError(f"unsupported HYPL version {version}")
        raw = fh.read(4 * h * w * c)
        if len(raw) != 4 * h * w * c:
            raise ValueError("truncated HYPL grid file")
    data = np.frombuffer(raw, dtype="<f4").reshape(h, w, c).astype(np.float32)
    return FeatureGrid(data)


def noise_grid(height: int, width: int, channels: int, seed: int) -> FeatureGrid:
    """Unit-variance noise grid from the package PRNG (float32)."""
    vals = normal(seed, 0, height * width * channels)
    return FeatureGrid(vals.reshape(height, width, channels).astype(np.float32))
