"""Deterministic toy volume renderer over any representation.

Rays march the unit cube with equispaced midpoints and front-to-back
emission-absorption compositing; a fixed seed-derived decoder turns feature
vectors into density and color.  There is no stochastic sampling anywhere,
so a (representation, camera, decoder, n_samples) tuple renders to the same
bytes on every run and under any thread count.

Images are written as binary PPM (P6, color) and PGM (P5, alpha) with
maxval 255, origin top-left, quantized as floor(v*255 + 0.5).
"""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import normalize
from .prng import uniform_sym
from .representation import Representation, channels, query

# rows are dispatched to workers in fixed-size blocks so the per-pixel
# arithmetic is identical no matter how many threads run
_ROW_BLOCK = 16


@dataclass(frozen=True)
class Camera:
    """Pinhole camera looking from position toward look_at."""

    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    fov_y: float
    width: int
    height: int

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        at = np.asarray(self.look_at, dtype=np.float64).reshape(3)
        up = np.asarray(self.up, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite([*pos, *at, *up])):
            raise ValueError("camera vectors must be finite")
        if np.array_equal(pos, at):
            raise ValueError("camera position must differ from look_at")
        if not 0.0 < self.fov_y < np.pi:
            raise ValueError("vertical fov must lie in (0, pi)")
        if self.width < 1 or self.height < 1:
            raise ValueError("image must be at least 1x1")
        forward = normalize(at - pos)
        side = np.cross(forward, up)
        if np.linalg.norm(side) == 0.0:
            raise ValueError("up vector is parallel to the view direction")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "look_at", at)
        object.__setattr__(self, "up", up)

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        forward = normalize(self.look_at - self.position)
        right = normalize(np.cross(forward, self.up))
        return forward, right, np.cross(right, forward)


def orbit_camera(azimuth: float, radius: float = 3.0, height: float = 0.0,
                 fov_y: float = np.pi / 3.0, width: int = 64, image_height: int = 64) -> Camera:
    """Camera on a horizontal orbit around the cube center, looking inward."""
    pos = np.array([radius * np.sin(azimuth), height, radius * np.cos(azimuth)])
    return Camera(pos, np.zeros(3), np.array([0.0, 1.0, 0.0]), fov_y, width, image_height)


@dataclass(frozen=True)
class ToyDecoder:
    """Fixed affine decoder from features to (density, color) logits.

    Weights come from the splitmix64 stream of ``seed``: first the density
    row, then the red, green and blue rows, each row being C feature weights
    followed by its bias, every value uniform in [-1, 1] scaled by
    1/sqrt(C+1).  Reconstruction is bit-exact across platforms.
    """

    seed: int
    density_weights: np.ndarray  # (C+1,)
    color_weights: np.ndarray    # (3, C+1)

    @property
    def feature_channels(self) -> int:
        return self.density_weights.shape[0] - 1


def make_decoder(seed: int, feature_channels: int) -> ToyDecoder:
    n = feature_channels + 1
    vals = uniform_sym(seed, 0, 4 * n) / np.sqrt(n)
    return ToyDecoder(seed=seed, density_weights=vals[:n], color_weights=vals[n:].reshape(3, n))


def decode(decoder: ToyDecoder, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sigma >= 0, rgb in [0,1]^3) via softplus / logistic heads."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape[-1] != decoder.feature_channels:
        raise ValueError("feature length does not match the decoder")
    d_logit = f @ decoder.density_weights[:-1] + decoder.density_weights[-1]
    c_logit = f @ decoder.color_weights[:, :-1].T + decoder.color_weights[:, -1]
    sigma = np.logaddexp(0.0, d_logit)
    rgb = 1.0 / (1.0 + np.exp(-c_logit))
    return sigma, rgb


@dataclass(frozen=True)
class RenderedImage:
    rgb: np.ndarray    # (H, W, 3) in [0, 1]
    alpha: np.ndarray  # (H, W) in [0, 1]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]


def composite(sigma: np.ndarray, rgb: np.ndarray, dt: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Front-to-back emission-absorption along the last sample axis.

    Returns (color, alpha, per-sample weights); alpha is one minus the final
    transmittance and equals the weight sum up to round-off.
    """
    absorb = 1.0 - np.exp(-sigma * np.asarray(dt)[..., None])
    trans = np.cumprod(1.0 - absorb, axis=-1)
    prior = np.concatenate([np.ones_like(trans[..., :1]), trans[..., :-1]], axis=-1)
    weights = absorb * prior
    color = np.sum(weights[..., None] * rgb, axis=-2)
    return color, 1.0 - trans[..., -1], weights


def _ray_cube_span(origins: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = (-1.0 - origins) / dirs
        hi = (1.0 - origins) / dirs
        near = np.where(np.isnan(lo), -np.inf, np.minimum(lo, hi))
        far = np.where(np.isnan(hi), np.inf, np.maximum(lo, hi))
    # rays parallel to a slab: inside keeps (-inf, inf), outside turns empty
    parallel = dirs == 0.0
    if np.any(parallel):
        inside = np.abs(origins) <= 1.0
        near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
    t0 = np.maximum(near.max(axis=-1), 0.0)
    t1 = far.min(axis=-1)
    return t0, t1


def _render_rows(rep, camera, decoder, n_samples, row0, row1):
    h, w = camera.height, camera.width
    forward, right, up = camera.basis()
    tan_half = np.tan(camera.fov_y / 2.0)
    aspect = w / h
    jj, ii = np.meshgrid(np.arange(w), np.arange(row0, row1))
    ndc_x = (jj + 0.5) / w * 2.0 - 1.0
    ndc_y = 1.0 - (ii + 0.5) / h * 2.0
    dirs = (
        forward
        + (ndc_x * tan_half * aspect)[..., None] * right
        + (ndc_y * tan_half)[..., None] * up
    )
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    dirs = dirs.reshape(-1, 3)
    origins = np.broadcast_to(camera.position, dirs.shape)

    t0, t1 = _ray_cube_span(origins, dirs)
    hit = t1 > t0
    block_rgb = np.zeros((dirs.shape[0], 3))
    block_alpha = np.zeros(dirs.shape[0])
    if np.any(hit):
        o = origins[hit]
        d = dirs[hit]
        ta = t0[hit]
        dt = (t1[hit] - ta) / n_samples
        steps = (np.arange(n_samples) + 0.5)[None, :] * dt[:, None] + ta[:, None]
        pts = o[:, None, :] + steps[..., None] * d[:, None, :]
        # a midpoint can cancel to the exact origin, where direction-indexed
        # planes are undefined; substitute the forward limit along the ray
        degenerate = np.all(pts == 0.0, axis=-1)
        if np.any(degenerate):
            pts = np.where(degenerate[..., None], d[:, None, :], pts)
        feats = query(rep, pts.reshape(-1, 3)).reshape(pts.shape[0], n_samples, -1)
        sigma, rgb = decode(decoder, feats)
        color, alpha, _ = composite(sigma, rgb, dt)
        block_rgb[hit] = np.clip(color, 0.0, 1.0)
        block_alpha[hit] = np.clip(alpha, 0.0, 1.0)
    return block_rgb.reshape(row1 - row0, w, 3), block_alpha.reshape(row1 - row0, w)


def worker_count(requested: int | None = None) -> int:
    """Requested workers capped by the HYPLANE_THREADS environment variable."""
    cap = os.environ.get("HYPLANE_THREADS")
    n = requested if requested is not None else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(1, n)


def render(
    rep: Representation,
    camera: Camera,
    decoder: ToyDecoder,
    n_samples: int = 48,
    threads: int | None = None,
) -> RenderedImage:
    """Render the representation through the toy decoder.

    Rays that miss the cube stay black and fully transparent.  Row blocks
    are fixed-size work units; any thread count yields identical bytes.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if decoder.feature_channels != channels(rep):
        raise ValueError("decoder channel count does not match the representation")
    h, w = camera.height, camera.width
    rgb = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    blocks = [(r, min(r + _ROW_BLOCK, h)) for r in range(0, h, _ROW_BLOCK)]
    workers = worker_count(threads)
    if workers == 1 or len(blocks) == 1:
        results = [_render_rows(rep, camera, decoder, n_samples, r0, r1) for r0, r1 in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda b: _render_rows(rep, camera, decoder, n_samples, b[0], b[1]), blocks)
            )
    for (r0, r1), (block_rgb, block_alpha) in zip(blocks, results):
        rgb[r0:r1] = block_rgb
        alpha[r0:r1] = block_alpha
    return RenderedImage(rgb=rgb, alpha=alpha)


# ---------------------------------------------------------------------------
# PPM / PGM


def _quantize(values: np.ndarray) -> np.ndarray:
    v = np.floor(np.asarray(values, dtype=np.float64) * 255.0 + 0.5)
    return np.clip(v, 0, 255).astype(np.uint8)


def _atomic_write(path, payload: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".img")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_ppm(path, rgb: np.ndarray) -> None:
    """Binary P6 image from float RGB in [0, 1] (or uint8 passed through)."""
    data = rgb if rgb.dtype == np.uint8 else _quantize(rgb)
    h, w, c = data.shape
    if c != 3:
        raise ValueError("PPM wants (H, W, 3)")
    _atomic_write(path, b"P6\n%d %d\n255\n" % (w, h) + data.tobytes())


def write_pgm(path, gray: np.ndarray) -> None:
    """Binary P5 image from float gray in [0, 1] (or uint8 passed through)."""
    data = gray if gray.dtype == np.uint8 else _quantize(gray)
    h, w = data.shape
    _atomic_write(path, b"P5\n%d %d\n255\n" % (w, h) + data.tobytes())


def _read_netpbm(path, magic: bytes) -> tuple[int, int, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(magic):
        raise ValueError(f"expected {magic.decode()} file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    return w, h, np.frombuffer(raw, dtype=np.uint8, offset=pos)


def read_ppm(path) -> np.ndarray:
    """P6 image as uint8 (H, W, 3)."""
    w, h, flat = _read_netpbm(path, b"P6")
    if flat.size < h * w * 3:
        raise ValueError("truncated PPM file")
    return flat[: h * w * 3].reshape(h, w, 3).copy()


def read_pgm(path) -> np.ndarray:
    """P5 image as uint8 (H, W)."""
    w, h, flat = _read_netpbm(path, b"P5")
    if flat.size < h * w:
        raise ValueError("truncated PGM file")
    return flat[: h * w].reshape(h, w).copy()
