"""Deterministic tile-parallel images of the filled Julia sets and of the mating.

Every pixel is a pure function of its coordinates and the ImageSpec, tiles are
computed independently and merged in row-major order, so the output bytes do
not depend on the number of worker threads.
"""
from __future__ import annotations

import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw

from . import kernels
from .maps import MATING, MapSpec, PetalData, classify_points, petal_data

TILE = 64
THREADS_ENV = "MATING_THREADS"

PALETTES = ("classic", "mono")

# petal shades, one per immediate basin (cycled when p > len)
_PETAL_RGB = np.array([
    (214, 82, 64), (232, 174, 52), (92, 168, 84), (64, 132, 200), (150, 96, 190),
    (64, 184, 176), (200, 96, 150), (140, 140, 60), (110, 80, 60), (90, 90, 150),
    (170, 120, 90), (60, 120, 100),
], dtype=np.float64)
_SIEGEL_RGB = (244, 184, 196)
_UNDECIDED_RGB = (18, 18, 24)
_INTERIOR_RGB = (12, 12, 16)


@dataclass(frozen=True)
class ImageSpec:
    fmap: MapSpec
    width: int = 512
    height: int = 512
    center: complex = 0j
    span: float = 4.0               # width of the viewport; pixels are square
    maxiter: int = 1000
    escape_radius: float = 4.0
    palette: str = "classic"
    rays: Tuple[str, ...] = ()      # angles a/b to overlay
    marks: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")
        if not self.span > 0:
            raise ValueError("span must be positive")
        if self.palette not in PALETTES:
            raise ValueError("unknown palette %r; choose from %s" % (self.palette, ", ".join(PALETTES)))
        if self.maxiter < 1:
            raise ValueError("maxiter must be positive")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "rays", tuple(str(r) for r in self.rays))
        object.__setattr__(self, "marks", tuple(complex(m) for m in self.marks))

    @property
    def pixel_size(self) -> float:
        return self.span / self.width

    def pixel_to_complex(self, x, y):
        """Centre of pixel (x, y); y grows downward."""
        h = self.pixel_size
        re = self.center.real + (np.asarray(x, dtype=np.float64) + 0.5 - self.width / 2) * h
        im = self.center.imag - (np.asarray(y, dtype=np.float64) + 0.5 - self.height / 2) * h
        return re + 1j * im

    def complex_to_pixel(self, z: complex) -> Tuple[float, float]:
        h = self.pixel_size
        x = (z.real - self.center.real) / h + self.width / 2 - 0.5
        y = -(z.imag - self.center.imag) / h + self.height / 2 - 0.5
        return x, y

    def to_dict(self) -> dict:
        return {
            "map": self.fmap.to_dict(),
            "width": self.width, "height": self.height,
            "center": [self.center.real, self.center.imag],
            "span": self.span, "maxiter": self.maxiter,
            "escape_radius": self.escape_radius, "palette": self.palette,
            "rays": list(self.rays),
            "marks": [[m.real, m.imag] for m in self.marks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImageSpec":
        return cls(
            fmap=MapSpec.from_dict(d["map"]),
            width=int(d["width"]), height=int(d["height"]),
            center=complex(*d["center"]), span=float(d["span"]),
            maxiter=int(d["maxiter"]), escape_radius=float(d["escape_radius"]),
            palette=d["palette"], rays=tuple(d.get("rays", ())),
            marks=tuple(complex(*m) for m in d.get("marks", ())),
        )


@dataclass
class RenderResult:
    spec: ImageSpec
    rgb: np.ndarray                  # (height, width, 3) uint8
    kind: np.ndarray                 # per pixel: escape count, or basin kind for the mating
    index: Optional[np.ndarray] = None
    step: Optional[np.ndarray] = None

    def png_bytes(self) -> bytes:
        buf = io.BytesIO()
        # fixed settings keep the encoder deterministic
        Image.fromarray(self.rgb, "RGB").save(buf, format="PNG", optimize=False, compress_level=6)
        return buf.getvalue()

    def save(self, path) -> Tuple[Path, Path]:
        """Write the PNG and a sidecar JSON holding the full ImageSpec."""
        path = Path(path)
        path.write_bytes(self.png_bytes())
        side = path.with_suffix(path.suffix + ".json")
        side.write_text(json.dumps({"version": 1, "image": self.spec.to_dict()},
                                   indent=2, sort_keys=True) + "\n")
        return path, side


def thread_count(threads: Optional[int] = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _tiles(spec: ImageSpec) -> List[Tuple[int, int, int, int]]:
    out = []
    for y0 in range(0, spec.height, TILE):
        for x0 in range(0, spec.width, TILE):
            out.append((x0, y0, min(x0 + TILE, spec.width), min(y0 + TILE, spec.height)))
    return out


def _tile_points(spec: ImageSpec, tile) -> np.ndarray:
    x0, y0, x1, y1 = tile
    xs, ys = np.meshgrid(np.arange(x0, x1), np.arange(y0, y1))
    return np.ascontiguousarray(spec.pixel_to_complex(xs, ys).ravel())


def _run_tiles(spec: ImageSpec, work, threads: Optional[int]):
    tiles = _tiles(spec)
    n = thread_count(threads)
    if n == 1:
        results = [work(t) for t in tiles]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(work, tiles))
    return tiles, results


def _merge(spec: ImageSpec, tiles, results, slot: int, dtype) -> np.ndarray:
    out = np.empty((spec.height, spec.width), dtype=dtype)
    for (x0, y0, x1, y1), res in zip(tiles, results):
        out[y0:y1, x0:x1] = res[slot].reshape(y1 - y0, x1 - x0)
    return out


# -- filled Julia sets ------------------------------------------------------

def escape_counts(spec: ImageSpec, threads: Optional[int] = None) -> np.ndarray:
    """First n >= 1 with |f^n(z)| > escape_radius; maxiter + 1 marks the filled Julia set."""
    lam = complex(spec.fmap.linear)

    def work(tile):
        zs = _tile_points(spec, tile)
        out = np.empty(zs.shape, dtype=np.int64)
        kernels.escape_times(zs, lam, spec.maxiter, spec.escape_radius, out)
        return (out,)

    tiles, results = _run_tiles(spec, work, threads)
    return _merge(spec, tiles, results, 0, np.int64)


def render_filled_julia(spec: ImageSpec, threads: Optional[int] = None) -> RenderResult:
    if spec.fmap.kind == MATING:
        raise ValueError("render_filled_julia takes a quadratic polynomial; use render_mating")
    counts = escape_counts(spec, threads)
    inside = counts > spec.maxiter
    if spec.palette == "mono":
        rgb = np.repeat(np.where(inside, 0, 255).astype(np.uint8)[..., None], 3, axis=2)
    else:
        # smooth in log of the escape count; banded so fine structure stays visible
        s = np.log1p(counts.astype(np.float64)) / np.log1p(spec.maxiter)
        r = 40 + 200 * s
        g = 60 + 160 * np.sqrt(s)
        b = 120 + 120 * (1 - s)
        rgb = np.stack([r, g, b], axis=-1)
        rgb[inside] = _INTERIOR_RGB
        rgb = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    res = RenderResult(spec, rgb, counts)
    return _with_overlay(res)


# -- the mating -------------------------------------------------------------

def classify_image(spec: ImageSpec, threads: Optional[int] = None,
                   pd: Optional[PetalData] = None):
    """(kind, petal index, entry step) arrays for every pixel of a mating image."""
    if spec.fmap.kind != MATING:
        raise ValueError("classify_image needs the mating map")
    pd = pd or petal_data(spec.fmap)

    def work(tile):
        return classify_points(spec.fmap, _tile_points(spec, tile), spec.maxiter, pd)

    tiles, results = _run_tiles(spec, work, threads)
    return (_merge(spec, tiles, results, 0, np.int8),
            _merge(spec, tiles, results, 1, np.int64),
            _merge(spec, tiles, results, 2, np.int64))


def _mating_rgb(spec: ImageSpec, kind, index, step, p: int) -> np.ndarray:
    h, w = kind.shape
    rgb = np.empty((h, w, 3), dtype=np.float64)
    rgb[:] = _UNDECIDED_RGB
    rgb[kind == kernels.SIEGEL] = _SIEGEL_RGB
    para = kind == kernels.PARABOLIC
    if spec.palette == "mono":
        rgb[para] = (255, 255, 255)
    else:
        base = _PETAL_RGB[np.where(para, index, 0) % len(_PETAL_RGB)]
        # entry time shading: a gentle sawtooth in log time
        t = np.log1p(step.astype(np.float64))
        shade = 0.78 + 0.22 * np.cos(2.2 * t)
        rgb[para] = (base * shade[..., None])[para]
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def render_mating(spec: ImageSpec, threads: Optional[int] = None,
                  pd: Optional[PetalData] = None) -> RenderResult:
    """Basin picture of the mating: petal-indexed parabolic basin, Siegel side, undecided.

    The undecided pixels trace the Julia set, which is the boundary of the
    parabolic basin.
    """
    pd = pd or petal_data(spec.fmap)
    kind, index, step = classify_image(spec, threads, pd)
    rgb = _mating_rgb(spec, kind, index, step, pd.p)
    return _with_overlay(RenderResult(spec, rgb, kind, index, step))


def render(spec: ImageSpec, threads: Optional[int] = None) -> RenderResult:
    if spec.fmap.kind == MATING:
        return render_mating(spec, threads)
    return render_filled_julia(spec, threads)


# -- overlays ---------------------------------------------------------------

_RAY_RGB = (255, 255, 255)
_MARK_RGB = (255, 40, 40)


def overlay_rays(result: RenderResult, traces: Sequence = (), marks: Sequence[complex] = ()) -> RenderResult:
    """Draw ray polylines and point markers; an empty overlay returns identical pixels."""
    if not traces and not marks:
        return replace(result, rgb=result.rgb.copy())
    spec = result.spec
    img = Image.fromarray(result.rgb, "RGB")
    draw = ImageDraw.Draw(img)
    for tr in traces:
        pts = [spec.complex_to_pixel(z) for _, z in tr.samples]
        if tr.landing is not None:
            pts.append(spec.complex_to_pixel(tr.landing))
        # rounding to a fixed grid keeps the rasterisation reproducible
        pts = [(round(x, 3), round(y, 3)) for x, y in pts
               if abs(x) < 4 * spec.width + 10 and abs(y) < 4 * spec.height + 10]
        if len(pts) >= 2:
            draw.line(pts, fill=_RAY_RGB, width=1)
    r = max(2, spec.width // 200)
    for m in marks:
        x, y = spec.complex_to_pixel(complex(m))
        draw.ellipse([round(x - r, 3), round(y - r, 3), round(x + r, 3), round(y + r, 3)],
                     outline=_MARK_RGB, width=1)
    return replace(result, rgb=np.asarray(img, dtype=np.uint8).copy())


def _with_overlay(result: RenderResult) -> RenderResult:
    spec = result.spec
    if not spec.rays and not spec.marks:
        return result
    traces = []
    if spec.rays and spec.fmap.kind != MATING:
        from .circle import Angle
        from .rays import trace_ray
        traces = [trace_ray(spec.fmap, Angle.parse(a)) for a in spec.rays]
    return overlay_rays(result, traces, spec.marks)


# -- picture checks ---------------------------------------------------------

def petal_indices_around(result: RenderResult, z0: complex, radius_px: float,
                         samples: int = 720) -> List[int]:
    """Petal indices met walking a pixel circle about z0, with consecutive repeats merged.

    Non-parabolic pixels are skipped, so the list is the cyclic sequence of basin
    regions touching the circle.
    """
    if result.index is None:
        raise ValueError("not a mating image")
    cx, cy = result.spec.complex_to_pixel(z0)
    seq = []
    for k in range(samples):
        a = 2 * np.pi * k / samples
        x = int(round(cx + radius_px * np.cos(a)))
        y = int(round(cy - radius_px * np.sin(a)))
        if not (0 <= x < result.spec.width and 0 <= y < result.spec.height):
            continue
        if result.kind[y, x] != kernels.PARABOLIC:
            continue
        i = int(result.index[y, x])
        if not seq or seq[-1] != i:
            seq.append(i)
    if len(seq) > 1 and seq[0] == seq[-1]:
        seq.pop()
    return seq
