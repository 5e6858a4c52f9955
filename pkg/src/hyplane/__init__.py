"""Hybrid planar/spherical feature fields as queryable 3D representations.

The package provides the near-equal-area sphere-to-square warp and its
baselines (warp), feature grids and sampleable planes (plane), six plane
arrangements behind one query() entry point (representation), the
unify-split shared-map layouts (layout), a deterministic toy volume
renderer (render), and a diagnostics suite quantifying warp uniformity,
seam continuity, map utilization and mirroring entanglement (metrics).
"""

from .geometry import (
    BACK_FRAME,
    FRONT_FRAME,
    PolarPoint,
    SphereFrame,
    SphericalDir,
    UP_FRAME,
    cartesian_to_dir,
    dir_to_cartesian,
)
from .layout import (
    Rect,
    RegionLayout,
    UnifiedMap,
    Variant,
    area_biased_layout_22,
    area_biased_layout_31,
    build,
    even_layout,
    random_representation,
    split,
    unified_noise_map,
)
from .metrics import (
    MetricReport,
    PINNED,
    density_cov,
    mirror_entanglement,
    polar_sensitivity,
    seam_gap,
    utilization,
)
from .plane import (
    FeatureGrid,
    PlanarPlane,
    SphericalPlane,
    noise_grid,
    read_grid,
    sample_bilinear,
    sample_planar,
    sample_spherical,
    write_grid,
)
from .render import (
    Camera,
    RenderedImage,
    ToyDecoder,
    composite,
    decode,
    make_decoder,
    orbit_camera,
    read_pgm,
    read_ppm,
    render,
    write_pgm,
    write_ppm,
)
from .representation import (
    DualSphericalTriPlane,
    HyPlane22,
    HyPlane31,
    MirrorPair,
    Representation,
    SphericalTriPlane,
    TriGrid,
    TriPlane,
    blend_dual_sphere,
    channels,
    component_features,
    load_representation,
    mirror_pair_features,
    query,
    save_representation,
)
from .warp import (
    DISC_RADIUS,
    WarpKind,
    area_scale,
    disc_to_square,
    laea_forward,
    laea_inverse,
    polar_to_xy,
    sphere_to_uv,
    square_to_disc,
    uv_to_sphere,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
