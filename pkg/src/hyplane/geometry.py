"""Coordinate types and conversions between Cartesian and spherical frames.

World coordinates live in the unit rendering cube [-1, 1]^3 with +z toward
the face, +y toward the top of the head and +x toward the left ear.  A
SphereFrame fixes a polar axis and a zero-longitude direction; all angular
coordinates in this package are defined relative to such a frame.

Azimuth convention, fixed once here and reused by every module: longitude
``phi`` is measured from ``ref_azimuth`` increasing toward
``cross(ref_azimuth, north)``.  In the head frame (north=+y, ref=+z) this
puts +x at phi = -pi/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_ORTHO_TOL = 1e-12


class SphericalDir(NamedTuple):
    """Direction as (colatitude, longitude); scalars or equally-shaped arrays.

    theta lies in [0, pi] (0 at the frame's North Pole), phi in (-pi, pi]
    and is canonicalized to 0 exactly at the poles.
    """

    theta: np.ndarray
    phi: np.ndarray


class PolarPoint(NamedTuple):
    """Point on the flattened disc as (radius, azimuth).

    radius lies in [0, 2]; azimuth in (-pi, pi], canonicalized to 0 at
    radius 0.
    """

    radius: np.ndarray
    azimuth: np.ndarray


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector(s) along v; raises on zero length."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("degenerate direction")
    return v / n


@dataclass(frozen=True)
class SphereFrame:
    """Orientation of a spherical plane: polar axis plus longitude-zero direction."""

    north: np.ndarray
    ref_azimuth: np.ndarray

    def __post_init__(self):
        north = np.asarray(self.north, dtype=np.float64).reshape(3)
        ref = np.asarray(self.ref_azimuth, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(north)) and np.all(np.isfinite(ref))):
            raise ValueError("frame axes must be finite")
        if abs(np.linalg.norm(north) - 1.0) > _ORTHO_TOL or abs(np.linalg.norm(ref) - 1.0) > _ORTHO_TOL:
            raise ValueError("frame axes must be unit length")
        if abs(float(north @ ref)) > _ORTHO_TOL:
            raise ValueError("ref_azimuth must be orthogonal to north")
        north.flags.writeable = False
        ref.flags.writeable = False
        object.__setattr__(self, "north", north)
        object.__setattr__(self, "ref_azimuth", ref)
        # axis at phi = +pi/2; see module docstring for the handedness choice
        quarter = np.cross(ref, north)
        quarter.flags.writeable = False
        object.__setattr__(self, "_quarter", quarter)

    def antipode(self) -> "SphereFrame":
        """Frame with the opposite polar axis and the same reference meridian."""
        return SphereFrame(-self.north, self.ref_azimuth)


# Head-model frames.  The 3+1 sphere points its opened pole downward (-y);
# the 2+2 pair opens toward +z / -z respectively, sharing the +y meridian.
UP_FRAME = SphereFrame(np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))
BACK_FRAME = SphereFrame(np.array([0.0, 0.0, -1.0]), np.array([0.0, 1.0, 0.0]))
FRONT_FRAME = SphereFrame(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0]))


def cartesian_to_dir(points: np.ndarray, frame: SphereFrame) -> SphericalDir:
    """Angular coordinates of point direction(s) in the given frame.

    Only the direction of ``points`` matters; any positive scaling gives the
    same result.  Zero-length input raises.
    """
    p = np.asarray(points, dtype=np.float64)
    norms = np.linalg.norm(p, axis=-1)
    if np.any(norms == 0.0):
        raise ValueError("degenerate direction")
    cos_t = np.clip((p @ frame.north) / norms, -1.0, 1.0)
    theta = np.arccos(cos_t)
    phi = np.arctan2(p @ frame._quarter, p @ frame.ref_azimuth)
    phi = np.where(phi == -np.pi, np.pi, phi)
    phi = np.where((theta == 0.0) | (theta == np.pi), 0.0, phi)
    return SphericalDir(theta, phi)


def dir_to_cartesian(d: SphericalDir, frame: SphereFrame) -> np.ndarray:
    """Unit vector(s) for angular coordinates in the given frame."""
    theta = np.asarray(d.theta, dtype=np.float64)
    phi = np.asarray(d.phi, dtype=np.float64)
    sin_t = np.sin(theta)
    return (
        np.cos(theta)[..., None] * frame.north
        + (sin_t * np.cos(phi))[..., None] * frame.ref_azimuth
        + (sin_t * np.sin(phi))[..., None] * frame._quarter
    )
