"""Sphere <-> square warps: equal-area disc flattening plus elliptical grid mapping.

The near-equal-area route runs in three stages:

  1. Lambert azimuthal equal-area flattening of the unit sphere onto a disc
     of radius 2: radius = 2*sin(theta/2), azimuth = -phi.  The North Pole
     lands at the disc center; the South Pole is opened onto the boundary
     circle radius = 2.  This stage is exactly equal-area, and it merges the
     longitude seam and both poles into a single boundary point.
  2. Polar to Cartesian on the disc.
  3. Elliptical grid mapping from the (rescaled) unit disc onto the square
     [-1, 1]^2.  The circle-to-square direction is division-free, so it
     stays finite on the full closed disc.

The azimuth negation in stage 1 is a fixed mirror choice; it is kept
because downstream image orientation is otherwise arbitrary.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .geometry import PolarPoint, SphericalDir

DISC_RADIUS = 2.0

_BOUNDARY_SLACK = 1e-9
_SQRT8 = np.sqrt(8.0)


class WarpKind(str, Enum):
    """Square-map parameterizations of the sphere."""

    NAIVE_THETA_PHI = "naive"       # u = phi/pi, v = 2*theta/pi - 1
    LAEA_DISC_ONLY = "disc"         # equal-area disc inscribed in the square
    LAEA_ELLIPTICAL = "elliptical"  # disc stretched onto the full square


def laea_forward(d: SphericalDir) -> PolarPoint:
    """Flatten a direction onto the radius-2 disc (exactly equal-area)."""
    theta = np.asarray(d.theta, dtype=np.float64)
    phi = np.asarray(d.phi, dtype=np.float64)
    radius = 2.0 * np.sin(theta / 2.0)
    azimuth = np.where(radius == 0.0, 0.0, -phi)
    azimuth = np.where(azimuth == -np.pi, np.pi, azimuth)
    return PolarPoint(radius, azimuth)


def laea_inverse(p: PolarPoint) -> SphericalDir:
    """Direction for a disc point; exact inverse of laea_forward."""
    radius = np.asarray(p.radius, dtype=np.float64)
    azimuth = np.asarray(p.azimuth, dtype=np.float64)
    if np.any(radius > DISC_RADIUS + _BOUNDARY_SLACK):
        raise ValueError("outside disc")
    theta = 2.0 * np.arcsin(np.minimum(radius, DISC_RADIUS) / 2.0)
    phi = np.where(azimuth == -np.pi, np.pi, -azimuth)
    phi = np.where((theta == 0.0) | (theta == np.pi), 0.0, phi)
    return SphericalDir(theta, phi)


def polar_to_xy(p: PolarPoint) -> tuple[np.ndarray, np.ndarray]:
    """Polar to Cartesian on the disc."""
    radius = np.asarray(p.radius, dtype=np.float64)
    azimuth = np.asarray(p.azimuth, dtype=np.float64)
    return radius * np.cos(azimuth), radius * np.sin(azimuth)


def disc_to_square(x: np.ndarray, y: np.ndarray, disc_radius: float = DISC_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Elliptical grid mapping of a disc point onto the square [-1, 1]^2.

    Inputs are rescaled onto the unit disc first.  Points within 1e-9 of the
    boundary are clamped onto it (round-off at the rim is routine); anything
    farther out raises.  The radicands are clipped at zero for the same
    reason, which keeps the map division-free and finite on the closed disc.
    """
    scale = 1.0 / float(disc_radius)
    x = np.asarray(x, dtype=np.float64) * scale
    y = np.asarray(y, dtype=np.float64) * scale
    if np.any(x * x + y * y > 1.0 + 2.0 * _BOUNDARY_SLACK):
        raise ValueError("outside disc")
    t = x * x - y * y
    u = 0.5 * np.sqrt(np.maximum(2.0 + t + _SQRT8 * x, 0.0)) - 0.5 * np.sqrt(
        np.maximum(2.0 + t - _SQRT8 * x, 0.0)
    )
    v = 0.5 * np.sqrt(np.maximum(2.0 - t + _SQRT8 * y, 0.0)) - 0.5 * np.sqrt(
        np.maximum(2.0 - t - _SQRT8 * y, 0.0)
    )
    return np.clip(u, -1.0, 1.0), np.clip(v, -1.0, 1.0)


def square_to_disc(u: np.ndarray, v: np.ndarray, disc_radius: float = DISC_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Inverse elliptical grid mapping; square point to disc point."""
    u = np.clip(np.asarray(u, dtype=np.float64), -1.0, 1.0)
    v = np.clip(np.asarray(v, dtype=np.float64), -1.0, 1.0)
    x = u * np.sqrt(1.0 - v * v / 2.0)
    y = v * np.sqrt(1.0 - u * u / 2.0)
    return disc_radius * x, disc_radius * y


def sphere_to_uv(d: SphericalDir, kind: WarpKind) -> tuple[np.ndarray, np.ndarray]:
    """Map a direction to square coordinates under the chosen warp."""
    if kind is WarpKind.NAIVE_THETA_PHI:
        theta = np.asarray(d.theta, dtype=np.float64)
        phi = np.asarray(d.phi, dtype=np.float64)
        return phi / np.pi, 2.0 * theta / np.pi - 1.0
    x, y = polar_to_xy(laea_forward(d))
    if kind is WarpKind.LAEA_DISC_ONLY:
        return x / DISC_RADIUS, y / DISC_RADIUS
    return disc_to_square(x, y, DISC_RADIUS)


def uv_to_sphere(u: np.ndarray, v: np.ndarray, kind: WarpKind) -> SphericalDir:
    """Inverse of sphere_to_uv on its image."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if kind is WarpKind.NAIVE_THETA_PHI:
        theta = (v + 1.0) * (np.pi / 2.0)
        phi = u * np.pi
        phi = np.where((theta == 0.0) | (theta == np.pi), 0.0, phi)
        return SphericalDir(theta, phi)
    if kind is WarpKind.LAEA_DISC_ONLY:
        x, y = DISC_RADIUS * u, DISC_RADIUS * v
    else:
        x, y = square_to_disc(u, v, DISC_RADIUS)
    radius = np.hypot(x, y)
    return laea_inverse(PolarPoint(radius, np.arctan2(y, x)))


def area_scale(d: SphericalDir, kind: WarpKind, step: float = 1e-5) -> np.ndarray:
    """Finite-difference |det J| of the sphere-to-UV map per unit solid angle.

    Central differences in (theta, phi) with the given step; the determinant
    is divided by sin(theta) to express UV area per steradian.  Directions
    within ``step`` of a pole raise, as does a non-positive step above 1e-3.
    """
    if not (0.0 < step <= 1e-3):
        raise ValueError("step must lie in (0, 1e-3]")
    theta = np.asarray(d.theta, dtype=np.float64)
    phi = np.asarray(d.phi, dtype=np.float64)
    if np.any((theta <= step) | (theta >= np.pi - step)):
        raise ValueError("too close to singular point")
    u_tp, v_tp = sphere_to_uv(SphericalDir(theta + step, phi), kind)
    u_tm, v_tm = sphere_to_uv(SphericalDir(theta - step, phi), kind)
    u_pp, v_pp = sphere_to_uv(SphericalDir(theta, phi + step), kind)
    u_pm, v_pm = sphere_to_uv(SphericalDir(theta, phi - step), kind)
    du_dt = (u_tp - u_tm) / (2.0 * step)
    dv_dt = (v_tp - v_tm) / (2.0 * step)
    du_dp = (u_pp - u_pm) / (2.0 * step)
    dv_dp = (v_pp - v_pm) / (2.0 * step)
    return np.abs(du_dt * dv_dp - du_dp * dv_dt) / np.sin(theta)
