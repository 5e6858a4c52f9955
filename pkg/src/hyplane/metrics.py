"""Quantitative diagnostics for the geometric claims behind each warp/variant.

Every metric is a pure function of (seed, parameters): sampling runs on
counter-based splitmix64 streams, so chunked or threaded execution returns
bit-identical numbers.  Regression thresholds in PINNED were fixed once by
running the measurement oracles and committing their outputs with margins.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import SphericalDir, cartesian_to_dir, dir_to_cartesian
from .plane import SphericalPlane, direction_uv, sample_bilinear
from .prng import sphere_directions, uniform01, uniform_sym
from .render import worker_count
from .representation import Representation, component_features, query
from .warp import WarpKind, sphere_to_uv

_CHUNK = 1 << 20

# measured-with-margin regression constants (see tests for the measurements)
PINNED = {
    "density_cov_ratio_min": 1.8,        # naive/elliptical CoV, measured ~2.17
    "density_row_profile_tol": 0.10,     # naive row counts track sin(theta)
    "utilization_full_min": 0.99,        # elliptical and naive cover the square
    "utilization_disc_target": 0.7853981633974483,  # pi/4
    "utilization_disc_tol": 0.01,
    "seam_naive_max_ratio_min": 10.0,    # seam max / interior median, measured ~140
    "seam_elliptical_median_ratio_lo": 0.5,
    "seam_elliptical_median_ratio_hi": 2.0,
    "polar_naive_ratio_min": 8.0,        # polar/equator roughness, measured ~19
    "polar_elliptical_ratio_lo": 0.5,    # away from the opened pole
    "polar_elliptical_ratio_hi": 2.0,
    "mirror_differ_min": 0.99,
    "area_scale_elliptical_spread_max": 25.0,  # max/min, measured ~8.3
}


@dataclass
class MetricReport:
    """Named scalar and histogram results plus the sampling metadata."""

    name: str
    scalars: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scalars": {k: self.scalars[k] for k in sorted(self.scalars)},
            "histograms": {
                k: {"edges": [float(e) for e in v[0]], "counts": [int(c) for c in v[1]]}
                for k, v in sorted(self.histograms.items())
            },
            "metadata": {k: self.metadata[k] for k in sorted(self.metadata)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _chunk_ranges(n: int) -> list[tuple[int, int]]:
    return [(s, min(s + _CHUNK, n)) for s in range(0, n, _CHUNK)]


def _map_chunks(fn, n: int) -> list:
    """Run fn(start, count) over fixed chunk ranges; results in chunk order."""
    ranges = _chunk_ranges(n)
    workers = worker_count()
    if workers == 1 or len(ranges) == 1:
        return [fn(s, e - s) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(r[0], r[1] - r[0]), ranges))


def _uv_samples(kind: WarpKind | None, seed: int, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    if kind is None:
        # synthetic control: uniform directly on the square
        u = uniform_sym(seed, start, count, stride=2, offset=0)
        v = uniform_sym(seed, start, count, stride=2, offset=1)
        return u, v
    theta, phi = sphere_directions(seed, start, count)
    return sphere_to_uv(SphericalDir(theta, phi), kind)


def density_cov(kind: WarpKind | None, bins: int = 64, n_samples: int = 1_000_000, seed: int = 0) -> MetricReport:
    """Bin uniformly distributed directions on the feature map; spread of
    per-bin density over the warp's image measures warping unevenness.

    kind=None draws points uniformly on the square itself, giving the
    Poisson noise floor as a control.
    """
    if bins < 8:
        raise ValueError("need at least 8 bins per axis")

    def one(start, count):
        u, v = _uv_samples(kind, seed, start, count)
        h, _, _ = np.histogram2d(u, v, bins=bins, range=[[-1.0, 1.0], [-1.0, 1.0]])
        return h.astype(np.int64)

    hist = sum(_map_chunks(one, n_samples))
    if kind is WarpKind.LAEA_DISC_ONLY:
        centers = (np.arange(bins) + 0.5) / bins * 2.0 - 1.0
        cu, cv = np.meshgrid(centers, centers, indexing="ij")
        in_image = cu * cu + cv * cv <= 1.0
    else:
        in_image = np.ones((bins, bins), dtype=bool)
    counts = hist[in_image].astype(np.float64)
    mean = counts.mean()
    report = MetricReport(
        name="density_cov",
        metadata={
            "kind": kind.value if kind is not None else "uniform-control",
            "bins": bins,
            "n_samples": n_samples,
            "seed": seed,
        },
    )
    report.scalars["cov"] = float(counts.std() / mean)
    report.scalars["density_min"] = float(counts.min() / mean)
    report.scalars["density_max"] = float(counts.max() / mean)
    report.scalars["poisson_floor"] = float(np.sqrt(in_image.sum() / n_samples))
    row_counts = hist.sum(axis=0)  # aggregate along u; rows index v
    edges = np.linspace(-1.0, 1.0, bins + 1)
    report.histograms["row_counts"] = (edges, row_counts)
    if kind is WarpKind.NAIVE_THETA_PHI:
        # expected row share under u=phi/pi, v=2*theta/pi-1 is exactly
        # proportional to cos(theta_lo) - cos(theta_hi) per row
        theta_edges = (edges + 1.0) * (np.pi / 2.0)
        expected = np.cos(theta_edges[:-1]) - np.cos(theta_edges[1:])
        ratio = (row_counts / n_samples) / (expected / 2.0)
        report.scalars["row_sin_profile_max_dev"] = float(np.abs(ratio - 1.0).max())
        # away-from-poles variant: rows fully inside 5-degree pole caps are
        # excluded (their tiny counts are Poisson-noise dominated)
        cap = np.pi / 36.0
        interior = (theta_edges[:-1] >= cap) & (theta_edges[1:] <= np.pi - cap)
        report.scalars["row_sin_profile_max_dev_interior"] = float(np.abs(ratio[interior] - 1.0).max())
    return report


def utilization(kind: WarpKind, resolution: int = 256, n_samples: int = 10_000_000, seed: int = 0) -> float:
    """Fraction of map texels receiving at least one of n_samples directions."""
    if resolution < 8:
        raise ValueError("resolution too small")
    hit = np.zeros(resolution * resolution, dtype=bool)

    def one(start, count):
        u, v = _uv_samples(kind, seed, start, count)
        iu = np.clip(((u + 1.0) * 0.5 * resolution).astype(np.int64), 0, resolution - 1)
        iv = np.clip(((v + 1.0) * 0.5 * resolution).astype(np.int64), 0, resolution - 1)
        return np.unique(iu * resolution + iv)

    for idx in _map_chunks(one, n_samples):
        hit[idx] = True
    return float(hit.mean())


_SEAM_COLAT_MARGIN = 0.05


def _band_colatitudes(seed, start, count, cos_lo, cos_hi, offset):
    u = uniform01(seed, start, count, stride=4, offset=offset)
    return np.arccos(cos_lo + (cos_hi - cos_lo) * u)


def seam_gap(sp: SphericalPlane, n_pairs: int = 4000, delta: float = 1e-3, seed: int = 0) -> MetricReport:
    """Feature gaps across the longitude seam versus matched interior pairs.

    Pairs sit delta apart in angle, straddling phi = +/-pi at the same
    colatitude as their interior controls; colatitudes stay clear of the
    poles by a fixed margin.
    """
    if not 0.0 < delta <= 1e-2:
        raise ValueError("delta must lie in (0, 1e-2]")
    cos_hi = np.cos(_SEAM_COLAT_MARGIN)
    theta = _band_colatitudes(seed, 0, n_pairs, -cos_hi, cos_hi, offset=0)
    half = delta / (2.0 * np.sin(theta))
    phi0 = uniform01(seed, 0, n_pairs, stride=4, offset=1) * 5.0 - 2.5

    def gaps(phi_a, phi_b):
        fa = sample_bilinear(sp.grid, *direction_uv(sp, SphericalDir(theta, phi_a)))
        fb = sample_bilinear(sp.grid, *direction_uv(sp, SphericalDir(theta, phi_b)))
        return np.linalg.norm(fa - fb, axis=-1)

    seam = gaps(np.pi - half, -np.pi + half)
    interior = gaps(phi0 + half, phi0 - half)
    med_seam = float(np.median(seam))
    med_int = float(np.median(interior))
    report = MetricReport(
        name="seam_gap",
        metadata={"kind": sp.kind.value, "n_pairs": n_pairs, "delta": delta, "seed": seed},
    )
    report.scalars.update(
        seam_median=med_seam,
        seam_max=float(seam.max()),
        interior_median=med_int,
        interior_max=float(interior.max()),
        median_ratio=(med_seam / med_int) if med_int > 0 else (0.0 if med_seam == 0 else None),
        seam_max_over_interior_median=(float(seam.max()) / med_int) if med_int > 0 else None,
    )
    return report


def mirror_entanglement(rep: Representation, n_points: int = 1000, seed: int = 0) -> MetricReport:
    """Similarity between features at random points and their z-reflections.

    Planar projection makes reflection-symmetric points share features
    exactly; the per-component exact-share fractions expose which planes
    carry that entanglement.
    """
    if n_points < 100:
        raise ValueError("need at least 100 points")
    pts = np.stack(
        [uniform_sym(seed, 0, n_points, stride=3, offset=k) for k in range(3)], axis=-1
    )
    mirrored = pts.copy()
    mirrored[:, 2] = -mirrored[:, 2]
    f = query(rep, pts)
    g = query(rep, mirrored)
    comp = component_features(rep, pts)
    comp_m = component_features(rep, mirrored)

    def cosine(a, b):
        denom = np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
        dots = np.sum(a * b, axis=-1)
        return np.where(denom > 0, dots / np.maximum(denom, 1e-300), 1.0)

    report = MetricReport(
        name="mirror_entanglement",
        metadata={"variant": type(rep).__name__, "n_points": n_points, "seed": seed},
    )
    report.scalars["mean_cosine"] = float(np.mean(cosine(f, g)))
    report.scalars["differ_fraction"] = float(np.mean(np.any(f != g, axis=-1)))
    for name in comp:
        a, b = comp[name], comp_m[name]
        report.scalars[f"exact_share.{name}"] = float(np.mean(np.all(a == b, axis=-1)))
        report.scalars[f"cosine.{name}"] = float(np.mean(cosine(a, b)))
    return report


_POLAR_CAP = np.pi / 18


def polar_sensitivity(
    sp: SphericalPlane, seed: int = 0, n_per_region: int = 20_000, step: float = 5e-3
) -> MetricReport:
    """Feature roughness (mean squared gap per squared radian) by region.

    Pairs sit ``step`` apart along random tangent directions; polar caps
    versus the equatorial band expose how a warp compresses map texels into
    the poles and turns them into high-frequency content.  The grid should
    carry unit-variance noise for comparable absolute numbers.
    """
    eps = step
    regions = {
        "north": (0.0, _POLAR_CAP),
        "equator": (np.pi / 2 - _POLAR_CAP, np.pi / 2 + _POLAR_CAP),
        "south": (np.pi - _POLAR_CAP, np.pi),
    }
    report = MetricReport(
        name="polar_sensitivity",
        metadata={
            "kind": sp.kind.value,
            "n_per_region": n_per_region,
            "step": eps,
            "cap": float(_POLAR_CAP),
            "seed": seed,
        },
    )
    for idx, (name, (lo, hi)) in enumerate(regions.items()):
        base = idx * 3 * n_per_region
        theta = _band_colatitudes(seed, base, n_per_region, np.cos(hi), np.cos(lo), offset=0)
        phi = (uniform01(seed, base, n_per_region, stride=4, offset=1) * 2.0 - 1.0) * (np.pi - 0.1)
        psi = uniform01(seed, base, n_per_region, stride=4, offset=2) * 2.0 * np.pi
        n = dir_to_cartesian(SphericalDir(theta, phi), sp.frame)
        helper = np.where(
            (np.abs(n[:, :1]) < 0.9), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        )
        a = np.cross(n, helper)
        a /= np.linalg.norm(a, axis=-1, keepdims=True)
        b = np.cross(n, a)
        tangent = np.cos(psi)[:, None] * a + np.sin(psi)[:, None] * b
        n2 = np.cos(eps) * n + np.sin(eps) * tangent
        fa = sample_bilinear(sp.grid, *direction_uv(sp, cartesian_to_dir(n, sp.frame)))
        fb = sample_bilinear(sp.grid, *direction_uv(sp, cartesian_to_dir(n2, sp.frame)))
        msd = float(np.mean(np.sum((fa - fb) ** 2, axis=-1)) / eps**2)
        report.scalars[f"roughness_{name}"] = msd
    eq = report.scalars["roughness_equator"]
    report.scalars["north_over_equator"] = report.scalars["roughness_north"] / eq if eq > 0 else None
    report.scalars["south_over_equator"] = report.scalars["roughness_south"] / eq if eq > 0 else None
    return report
