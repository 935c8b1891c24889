"""Occupancy grids on boxes in log space, set algebra and serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import GridMismatch, ValidationError

RLE_FORMAT = "amoeba-scope.voxels"
RLE_VERSION = 1


def parse_window(window, ndim: int | None = None) -> np.ndarray:
    """Normalise a box to shape ``(n, 2)``; accepts nested pairs or a flat ``lo1, hi1, ...`` list."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim == 1:
        if w.size % 2:
            raise ValidationError("window needs lo,hi pairs")
        w = w.reshape(-1, 2)
    if w.ndim != 2 or w.shape[1] != 2:
        raise ValidationError("window must be a sequence of (lo, hi) pairs")
    if ndim is not None and w.shape[0] != ndim:
        raise ValidationError(f"window has {w.shape[0]} axes, expected {ndim}")
    if not np.all(np.isfinite(w)) or np.any(w[:, 0] >= w[:, 1]):
        raise ValidationError("window must satisfy lo < hi on every axis")
    return w


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    lo: np.ndarray
    hi: np.ndarray
    occupied: np.ndarray  # bool, shape == resolution

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        occ = np.asarray(self.occupied, dtype=bool)
        if lo.shape != hi.shape or lo.ndim != 1 or occ.ndim != lo.size:
            raise ValidationError("box and occupancy dimensions disagree")
        if np.any(lo >= hi):
            raise ValidationError("grid box must have lo < hi")
        if min(occ.shape) < 1:
            raise ValidationError("resolution must be at least 1 on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "occupied", occ)

    @classmethod
    def empty(cls, window, resolution) -> "VoxelGrid":
        w = parse_window(window)
        res = _resolution(resolution, w.shape[0])
        return cls(w[:, 0], w[:, 1], np.zeros(res, dtype=bool))

    @property
    def ndim(self) -> int:
        return self.lo.size

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.occupied.shape

    @property
    def pitch(self) -> np.ndarray:
        return (self.hi - self.lo) / np.array(self.resolution)

    @property
    def window(self) -> np.ndarray:
        return np.stack([self.lo, self.hi], axis=1)

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.resolution[axis]) + 0.5) * self.pitch[axis]

    def centers(self, index) -> np.ndarray:
        """Cell centres for integer index tuples (rows of ``index``)."""
        index = np.atleast_2d(np.asarray(index))
        return self.lo + (index + 0.5) * self.pitch

    def cell_index(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Cell indices of points and a mask of points inside the closed box."""
        P = np.atleast_2d(np.asarray(points, dtype=np.float64))
        inside = np.all((P >= self.lo) & (P <= self.hi), axis=1)
        idx = np.floor((P - self.lo) / self.pitch).astype(np.int64)
        idx = np.clip(idx, 0, np.array(self.resolution) - 1)
        return idx, inside

    def count(self) -> int:
        return int(self.occupied.sum())

    def same_frame(self, other: "VoxelGrid") -> bool:
        return (self.resolution == other.resolution and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    def with_occupancy(self, occ) -> "VoxelGrid":
        return VoxelGrid(self.lo, self.hi, occ)

    def __eq__(self, other):
        return isinstance(other, VoxelGrid) and self.same_frame(other) and np.array_equal(self.occupied, other.occupied)

    __hash__ = None


def _resolution(res, n: int) -> tuple[int, ...]:
    r = (int(res),) * n if np.isscalar(res) else tuple(int(v) for v in res)
    if len(r) != n or min(r) < 1:
        raise ValidationError("resolution must be a positive integer per axis")
    return r


def _check(grids) -> None:
    first = grids[0]
    for g in grids[1:]:
        if not first.same_frame(g):
            raise GridMismatch("grids differ in box or resolution")


def grid_intersect(grids) -> VoxelGrid:
    grids = list(grids)
    if not grids:
        raise ValidationError("need at least one grid")
    _check(grids)
    occ = np.logical_and.reduce([g.occupied for g in grids])
    return grids[0].with_occupancy(occ)


def grid_union(grids) -> VoxelGrid:
    grids = list(grids)
    if not grids:
        raise ValidationError("need at least one grid")
    _check(grids)
    return grids[0].with_occupancy(np.logical_or.reduce([g.occupied for g in grids]))


def grid_difference(a: VoxelGrid, b: VoxelGrid) -> VoxelGrid:
    _check([a, b])
    return a.with_occupancy(a.occupied & ~b.occupied)


def grid_complement(a: VoxelGrid) -> VoxelGrid:
    return a.with_occupancy(~a.occupied)


def grid_count(g: VoxelGrid) -> int:
    return g.count()


def complement_components(g: VoxelGrid) -> int:
    """Number of face-connected components of the unoccupied cells."""
    _, n = ndimage.label(~g.occupied)
    return int(n)


def boundary_cells(g: VoxelGrid) -> np.ndarray:
    """Occupied cells with an unoccupied face neighbour inside the box."""
    occ = g.occupied
    padded = np.pad(occ, 1, mode="edge")
    inner = ndimage.binary_erosion(padded, border_value=1)[tuple(slice(1, -1) for _ in range(occ.ndim))]
    return occ & ~inner


# ---------------------------------------------------------------------------
# run-length text + JSON sidecar


def to_rle(g: VoxelGrid) -> str:
    """Run lengths over the C-order flattening, alternating and starting with unoccupied."""
    flat = g.occupied.ravel()
    change = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs = [0] + runs
    return " ".join(str(r) for r in runs) + "\n"


def sidecar(g: VoxelGrid) -> dict:
    return {
        "format": RLE_FORMAT,
        "version": RLE_VERSION,
        "lo": g.lo.tolist(),
        "hi": g.hi.tolist(),
        "resolution": list(g.resolution),
        "occupied": g.count(),
        "cells": int(np.prod(g.resolution)),
    }


def from_rle(text: str, meta: dict) -> VoxelGrid:
    if meta.get("format") != RLE_FORMAT:
        raise ValidationError("not a voxel sidecar")
    res = tuple(int(r) for r in meta["resolution"])
    runs = [int(t) for t in text.split()]
    total = int(np.prod(res))
    if sum(runs) != total:
        raise ValidationError(f"run lengths sum to {sum(runs)}, expected {total}")
    flat = np.repeat(np.arange(len(runs)) % 2 == 1, runs)
    return VoxelGrid(np.array(meta["lo"]), np.array(meta["hi"]), flat.reshape(res))


def save_grid(g: VoxelGrid, path) -> tuple[Path, Path]:
    """Write ``<path>.rle`` and ``<path>.json``."""
    base = Path(path)
    rle = base.with_suffix(".rle")
    meta = base.with_suffix(".json")
    rle.write_text(to_rle(g))
    meta.write_text(json.dumps(sidecar(g), indent=2, sort_keys=True) + "\n")
    return rle, meta


def load_grid(path) -> VoxelGrid:
    base = Path(path)
    meta = json.loads(base.with_suffix(".json").read_text())
    return from_rle(base.with_suffix(".rle").read_text(), meta)


__all__ = [
    "VoxelGrid",
    "boundary_cells",
    "complement_components",
    "from_rle",
    "grid_complement",
    "grid_count",
    "grid_difference",
    "grid_intersect",
    "grid_union",
    "load_grid",
    "parse_window",
    "save_grid",
    "sidecar",
    "to_rle",
]
