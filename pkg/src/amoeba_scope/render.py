"""Deterministic PNG and SVG emitters for grids, point clouds and markers.

A :class:`SceneSpec` holds one or more panels; each panel maps its own data
window affinely onto a pixel rectangle (y pointing up). The same scene
renders to a PNG (Pillow, no metadata chunks) and to a hand-written SVG.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .errors import ValidationError
from .voxels import VoxelGrid

PALETTE = {
    "background": (255, 255, 255),
    "frame": (40, 40, 40),
    "grid": (186, 206, 235),
    "contour": (200, 40, 40),
    "cloud": (30, 30, 120),
    "derived": (0, 150, 60),
    "stated": (230, 120, 0),
    "Boundary": (200, 40, 40),
    "Interior": (30, 90, 200),
    "Outside": (120, 120, 120),
    "NonRegular": (150, 0, 150),
    "Degenerate": (230, 170, 0),
    "witness": (220, 0, 0),
}


@dataclass(frozen=True)
class GridLayer:
    grid: VoxelGrid
    color: tuple = PALETTE["grid"]


@dataclass(frozen=True)
class PointsLayer:
    points: np.ndarray  # (K, 2)
    color: tuple = PALETTE["cloud"]
    radius: int = 0  # 0 draws single pixels


@dataclass(frozen=True)
class MarkerLayer:
    points: np.ndarray  # (K, 2)
    color: tuple = PALETTE["derived"]
    size: int = 5
    labels: tuple = ()
    label_below: bool = False


@dataclass(frozen=True)
class PolylineLayer:
    points: np.ndarray  # (K, 2)
    color: tuple = PALETTE["frame"]


@dataclass(frozen=True)
class Panel:
    window: np.ndarray  # [[xlo, xhi], [ylo, yhi]]
    layers: tuple = ()
    title: str = ""
    axis_labels: tuple = ("", "")


@dataclass(frozen=True)
class SceneSpec:
    panels: tuple
    panel_size: tuple = (480, 480)
    margin: int = 28
    background: tuple = PALETTE["background"]
    notes: tuple = ()  # annotation lines printed under the panels

    @property
    def size(self) -> tuple[int, int]:
        w = self.panel_size[0] * len(self.panels)
        h = self.panel_size[1] + 14 * len(self.notes)
        return w, h


class _Frame:
    """Affine map from a panel's data window to canvas pixels."""

    def __init__(self, scene: SceneSpec, k: int, window):
        self.window = np.asarray(window, dtype=np.float64).reshape(2, 2)
        if np.any(self.window[:, 0] >= self.window[:, 1]):
            raise ValidationError("panel window must have lo < hi")
        pw, ph = scene.panel_size
        m = scene.margin
        self.x0 = k * pw + m
        self.y0 = m
        self.w = pw - 2 * m
        self.h = ph - 2 * m

    def to_px(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        (xl, xh), (yl, yh) = self.window
        px = self.x0 + (P[:, 0] - xl) / (xh - xl) * self.w
        py = self.y0 + (yh - P[:, 1]) / (yh - yl) * self.h
        return np.stack([px, py], axis=1)

    def inside(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        (xl, xh), (yl, yh) = self.window
        return (P[:, 0] >= xl) & (P[:, 0] <= xh) & (P[:, 1] >= yl) & (P[:, 1] <= yh)


def _grid_rects(frame: _Frame, grid: VoxelGrid):
    if grid.ndim != 2:
        raise ValidationError("only 2-D grids can be drawn directly")
    idx = np.argwhere(grid.occupied)
    lo = grid.lo + idx * grid.pitch
    hi = lo + grid.pitch
    a = frame.to_px(np.stack([lo[:, 0], hi[:, 1]], axis=1))
    b = frame.to_px(np.stack([hi[:, 0], lo[:, 1]], axis=1))
    return np.floor(a).astype(int), np.ceil(b).astype(int) - 1


def _font():
    return ImageFont.load_default()


def render_png(scene: SceneSpec) -> bytes:
    img = Image.new("RGB", scene.size, scene.background)
    draw = ImageDraw.Draw(img)
    font = _font()
    for k, panel in enumerate(scene.panels):
        fr = _Frame(scene, k, panel.window)
        for layer in panel.layers:
            if isinstance(layer, GridLayer):
                a, b = _grid_rects(fr, layer.grid)
                for (x0, y0), (x1, y1) in zip(a, b):
                    draw.rectangle([x0, y0, max(x0, x1), max(y0, y1)], fill=layer.color)
            elif isinstance(layer, PointsLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                px = np.rint(fr.to_px(P[fr.inside(P)])).astype(int)
                r = layer.radius
                for x, y in px:
                    if r == 0:
                        draw.point((x, y), fill=layer.color)
                    else:
                        draw.ellipse([x - r, y - r, x + r, y + r], fill=layer.color)
            elif isinstance(layer, PolylineLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                P = P[np.all(np.isfinite(P), axis=1)]
                if len(P) > 1:
                    draw.line([tuple(p) for p in np.rint(fr.to_px(P)).astype(int)], fill=layer.color, width=1)
            elif isinstance(layer, MarkerLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                keep = fr.inside(P)
                px = np.rint(fr.to_px(P)).astype(int)
                s = layer.size
                dy = s + 2 if layer.label_below else -s - 10
                for i, (x, y) in enumerate(px):
                    if not keep[i]:
                        continue
                    draw.line([x - s, y, x + s, y], fill=layer.color, width=2)
                    draw.line([x, y - s, x, y + s], fill=layer.color, width=2)
                    if i < len(layer.labels) and layer.labels[i]:
                        draw.text((x + s + 2, y + dy), layer.labels[i], fill=layer.color, font=font)
        draw.rectangle([fr.x0, fr.y0, fr.x0 + fr.w, fr.y0 + fr.h], outline=PALETTE["frame"])
        if panel.title:
            draw.text((fr.x0, 6), panel.title, fill=PALETTE["frame"], font=font)
        xl, yl = panel.axis_labels
        if xl:
            draw.text((fr.x0 + fr.w - 6 * len(xl), fr.y0 + fr.h + 6), xl, fill=PALETTE["frame"], font=font)
        if yl:
            draw.text((fr.x0 - 24, fr.y0), yl, fill=PALETTE["frame"], font=font)
    for i, line in enumerate(scene.notes):
        draw.text((scene.margin, scene.panel_size[1] + 14 * i), line, fill=PALETTE["frame"], font=font)
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False, compress_level=6)
    return buf.getvalue()


def _hex(c) -> str:
    return "#%02x%02x%02x" % tuple(int(v) for v in c)


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(scene: SceneSpec) -> bytes:
    W, H = scene.size
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="{_hex(scene.background)}"/>']
    for k, panel in enumerate(scene.panels):
        fr = _Frame(scene, k, panel.window)
        out.append(f'<g id="panel{k}">')
        for layer in panel.layers:
            if isinstance(layer, GridLayer):
                a, b = _grid_rects(fr, layer.grid)
                col = _hex(layer.color)
                for (x0, y0), (x1, y1) in zip(a, b):
                    out.append(f'<rect x="{x0}" y="{y0}" width="{max(1, x1 - x0 + 1)}" '
                               f'height="{max(1, y1 - y0 + 1)}" fill="{col}"/>')
            elif isinstance(layer, PointsLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                px = fr.to_px(P[fr.inside(P)])
                r = max(layer.radius, 0.6)
                col = _hex(layer.color)
                for x, y in px:
                    out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:g}" fill="{col}"/>')
            elif isinstance(layer, PolylineLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                P = P[np.all(np.isfinite(P), axis=1)]
                if len(P) > 1:
                    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in fr.to_px(P))
                    out.append(f'<polyline points="{pts}" fill="none" stroke="{_hex(layer.color)}"/>')
            elif isinstance(layer, MarkerLayer):
                P = np.asarray(layer.points).reshape(-1, 2)
                keep = fr.inside(P)
                col = _hex(layer.color)
                s = layer.size
                dy = s + 10 if layer.label_below else -s
                for i, (x, y) in enumerate(fr.to_px(P)):
                    if not keep[i]:
                        continue
                    out.append(f'<path d="M{x - s:.2f},{y:.2f}H{x + s:.2f}M{x:.2f},{y - s:.2f}V{y + s:.2f}" '
                               f'stroke="{col}" stroke-width="2"/>')
                    if i < len(layer.labels) and layer.labels[i]:
                        out.append(f'<text x="{x + s + 2:.2f}" y="{y + dy:.2f}" font-size="10" '
                                   f'fill="{col}">{_esc(layer.labels[i])}</text>')
        out.append(f'<rect x="{fr.x0}" y="{fr.y0}" width="{fr.w}" height="{fr.h}" fill="none" '
                   f'stroke="{_hex(PALETTE["frame"])}"/>')
        if panel.title:
            out.append(f'<text x="{fr.x0}" y="16" font-size="11">{_esc(panel.title)}</text>')
        xl, yl = panel.axis_labels
        if xl:
            out.append(f'<text x="{fr.x0 + fr.w - 6 * len(xl)}" y="{fr.y0 + fr.h + 16}" font-size="10">{_esc(xl)}</text>')
        if yl:
            out.append(f'<text x="{fr.x0 - 24}" y="{fr.y0 + 10}" font-size="10">{_esc(yl)}</text>')
        out.append("</g>")
    for i, line in enumerate(scene.notes):
        out.append(f'<text x="{scene.margin}" y="{scene.panel_size[1] + 14 * i + 10}" font-size="10">{_esc(line)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode()


def render_grid(content, scene: SceneSpec | None = None, fmt: str = "png") -> bytes:
    """Render a 2-D grid, a 2-D or 3-D point array, or a prepared scene."""
    if scene is None:
        if isinstance(content, VoxelGrid):
            scene = SceneSpec((Panel(content.window, (GridLayer(content),)),))
        else:
            P = np.asarray(content, dtype=np.float64)
            scene = triple_view(P) if P.shape[-1] == 3 else SceneSpec((Panel(_bounds(P), (PointsLayer(P),)),))
    return render_png(scene) if fmt == "png" else render_svg(scene)


def _bounds(P: np.ndarray, pad: float = 0.05) -> np.ndarray:
    if P.size == 0:
        return np.array([[-1.0, 1.0], [-1.0, 1.0]])
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    return np.stack([lo - pad * span, hi + pad * span], axis=1)


PROJECTIONS = ((0, 1), (0, 2), (1, 2))


def triple_view(points, window=None, extra=(), color=PALETTE["cloud"], title: str = "",
                notes: tuple = (), panel_size=(400, 400)) -> SceneSpec:
    """Three labelled orthographic projections of a 3-D cloud.

    ``extra`` holds ``(points3d, color, size, labels)`` marker groups drawn on every panel.
    """
    P = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    win = np.asarray(window, dtype=np.float64) if window is not None else _bounds(P)
    panels = []
    for a, b in PROJECTIONS:
        layers = [PointsLayer(P[:, [a, b]], color)]
        for pts, col, size, labels in extra:
            Q = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
            layers.append(MarkerLayer(Q[:, [a, b]], col, size, tuple(labels)))
        t = f"{title} x{a + 1}-x{b + 1}".strip()
        panels.append(Panel(win[[a, b]], tuple(layers), t, (f"x{a + 1}", f"x{b + 1}")))
    return SceneSpec(tuple(panels), panel_size, notes=tuple(notes))


__all__ = [
    "GridLayer",
    "MarkerLayer",
    "PALETTE",
    "Panel",
    "PointsLayer",
    "PolylineLayer",
    "SceneSpec",
    "render_grid",
    "render_png",
    "render_svg",
    "triple_view",
]
