"""Region scans over eigenvalue angles using the closed-form mu-row only.

For d = 2, 3 the angles (t_2, ..., t_d) with t_1 = 0 are sampled at cell
centres (k + 1/2) / resolution and every cell gets one class. For d = 4, 5
the parameter space is sampled at seeded random points instead.
"""

from __future__ import annotations

import enum
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectra import (
    BOUNDARY_EPS,
    DISTINCT_TOL,
    SIMPLE_TOL,
    Verdict,
    gammas_from_angles,
    lambdas_from_angles,
    mu_row_array,
    q_array,
)

MIN_RESOLUTION = 16
MAX_RESOLUTION = 4096


class CellClass(enum.IntEnum):
    BLACK = 0      # all mu_1i positive
    GREY = 1       # mixed signs
    WHITE = 2      # all negative
    BOUNDARY = 3   # some |mu_1i| within the boundary band
    EXCLUDED = 4   # coincident eigenvalues or not simple


PGM_LEVELS = {
    CellClass.BLACK: 0,
    CellClass.GREY: 128,
    CellClass.WHITE: 255,
    CellClass.BOUNDARY: 200,
    CellClass.EXCLUDED: 64,
}

_VERDICT_OF = {
    CellClass.BLACK: Verdict.UNITARIZABLE,
    CellClass.GREY: Verdict.NOT_UNITARIZABLE,
    CellClass.WHITE: Verdict.NOT_UNITARIZABLE,
    CellClass.BOUNDARY: Verdict.BOUNDARY,
    CellClass.EXCLUDED: Verdict.NOT_SIMPLE,
}

# The six d = 3 walls as a t2 + b t3 = c (mod 1).
D3_LINES = (
    (1.0, 1.0, 0.5),
    (-2.0, 1.0, 0.5),
    (1.0, -2.0, 0.5),
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (1.0, -1.0, 0.0),
)


def cell_centres(resolution: int) -> np.ndarray:
    return (np.arange(resolution) + 0.5) / resolution


def _check_resolution(resolution: int) -> None:
    if not (MIN_RESOLUTION <= resolution <= MAX_RESOLUTION):
        raise ValueError(f"resolution must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")


def classify_angles(angles: np.ndarray, branch: Optional[int] = None,
                    eps: float = BOUNDARY_EPS) -> tuple[np.ndarray, np.ndarray]:
    """Classes and real mu-rows for an array of full angle vectors (shape (..., d))."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[-1]
    lam = lambdas_from_angles(angles)
    gamma = gammas_from_angles(angles, branch) if d >= 4 else None

    excluded = np.zeros(angles.shape[:-1], dtype=bool)
    for j in range(d):
        for k in range(j + 1, d):
            excluded |= np.abs(lam[..., j] - lam[..., k]) <= DISTINCT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        for r in range(d):
            for c in range(d):
                if r != c:
                    excluded |= np.abs(q_array(lam, gamma, r, c)) <= SIMPLE_TOL
        mu = mu_row_array(lam, gamma).real
    mu = np.where(excluded[..., None], np.nan, mu)

    cls = np.full(angles.shape[:-1], CellClass.WHITE, dtype=np.uint8)
    pos = np.all(mu > 0, axis=-1)
    neg = np.all(mu < 0, axis=-1)
    cls[pos] = CellClass.BLACK
    cls[~pos & ~neg] = CellClass.GREY
    cls[np.any(np.abs(mu) <= eps, axis=-1)] = CellClass.BOUNDARY
    cls[excluded] = CellClass.EXCLUDED
    return cls, mu


def _grid_rows(args) -> np.ndarray:
    d, resolution, rows, eps = args
    t = cell_centres(resolution)
    if d == 2:
        angles = np.stack([np.zeros(resolution), t], axis=-1)[None]
    else:
        t3 = t[rows]
        T2, T3 = np.meshgrid(t, t3)
        angles = np.stack([np.zeros_like(T2), T2, T3], axis=-1)
    return classify_angles(angles, None, eps)[0]


@dataclass(frozen=True)
class RegionRaster:
    """Classified grid; rows follow t_3 (one row for d = 2), columns follow t_2."""

    d: int
    resolution: int
    cells: np.ndarray
    eps: float = BOUNDARY_EPS

    def counts(self) -> dict[str, int]:
        return {c.name.lower(): int(np.sum(self.cells == c)) for c in CellClass}

    def to_pgm(self) -> bytes:
        return _pgm_bytes(np.vectorize(PGM_LEVELS.__getitem__, otypes=[np.int64])(self.cells))

    def line_mask(self) -> np.ndarray:
        if self.d != 3:
            raise ValueError("boundary lines are defined for d = 3 only")
        return d3_line_mask(self.resolution)

    def to_json_dict(self) -> dict:
        out = {
            "d": self.d,
            "resolution": self.resolution,
            "boundary_eps": self.eps,
            "levels": {c.name.lower(): PGM_LEVELS[c] for c in CellClass},
            "counts": self.counts(),
            "cells": self.cells.tolist(),
        }
        if self.d == 3:
            out["lines"] = self.line_mask().astype(int).tolist()
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        t = cell_centres(self.resolution)
        if self.d == 2:
            angles = np.stack([np.zeros(self.resolution), t], axis=-1)
        else:
            T2, T3 = np.meshgrid(t, t)
            angles = np.stack([np.zeros(T2.size), T2.ravel(), T3.ravel()], axis=-1)
        _, mu = classify_angles(angles, None, self.eps)
        write_csv(buf, angles, None, mu, self.cells.ravel())
        return buf.getvalue()


def scan_raster(d: int, resolution: int, eps: float = BOUNDARY_EPS, jobs: int = 1) -> RegionRaster:
    """Classify every cell; ``jobs`` > 1 splits rows over processes without changing the result."""
    if d not in (2, 3):
        raise ValueError("raster scans exist for d = 2, 3 only")
    _check_resolution(resolution)
    if d == 2:
        return RegionRaster(d, resolution, _grid_rows((d, resolution, None, eps)), eps)
    chunks = [c for c in np.array_split(np.arange(resolution), max(1, jobs) * 4) if c.size]
    work = [(d, resolution, c, eps) for c in chunks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_grid_rows, work))
    else:
        parts = [_grid_rows(w) for w in work]
    return RegionRaster(d, resolution, np.concatenate(parts, axis=0), eps)


def line_distance(t2, t3) -> np.ndarray:
    """Distance (in turns) from (t2, t3) to the nearest of the six d = 3 walls, mod 1."""
    t2, t3 = np.asarray(t2, dtype=float), np.asarray(t3, dtype=float)
    best = np.full(np.broadcast(t2, t3).shape, np.inf)
    for a, b, c in D3_LINES:
        f = a * t2 + b * t3 - c
        f = f - np.round(f)
        best = np.minimum(best, np.abs(f) / np.hypot(a, b))
    return best


def d3_line_mask(resolution: int) -> np.ndarray:
    """Cells whose centre lies within half a cell diagonal of a wall."""
    t = cell_centres(resolution)
    T2, T3 = np.meshgrid(t, t)
    return line_distance(T2, T3) <= np.sqrt(0.5) / resolution


def class_transitions(cells: np.ndarray):
    """Midpoints (t2, t3) of horizontally or vertically adjacent black/grey/white cells of different class."""
    res = cells.shape[1]
    colored = cells <= CellClass.WHITE
    pts = []
    for axis in (0, 1):
        a = cells
        b = np.roll(cells, -1, axis=axis)
        ca, cb = colored, np.roll(colored, -1, axis=axis)
        rows, cols = np.nonzero(ca & cb & (a != b))
        t2 = (cols + 0.5 + (0.5 if axis == 1 else 0.0)) / res
        t3 = (rows + 0.5 + (0.5 if axis == 0 else 0.0)) / res
        pts.append(np.stack([t2 % 1.0, t3 % 1.0], axis=-1))
    return np.concatenate(pts, axis=0)


def sample_angles(d: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.concatenate([np.zeros((n, 1)), rng.random((n, d - 1))], axis=1)


def scan_samples(d: int, n: int, branch: int, seed: int, eps: float = BOUNDARY_EPS,
                 jobs: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded random spectra for d = 4, 5: angles, mu-rows and classes."""
    if d not in (4, 5):
        raise ValueError("sampled scans are for d = 4, 5")
    angles = sample_angles(d, n, seed)
    chunks = np.array_split(angles, max(1, jobs) * 4)
    work = [(c, branch, eps) for c in chunks if len(c)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_classify_chunk, work))
    else:
        parts = [_classify_chunk(w) for w in work]
    cls = np.concatenate([p[0] for p in parts])
    mu = np.concatenate([p[1] for p in parts])
    return angles, mu, cls


def _classify_chunk(args):
    angles, branch, eps = args
    return classify_angles(angles, branch, eps)


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else "%.12g" % x


def write_csv(out, angles: np.ndarray, branch: Optional[int], mu: np.ndarray, cls: np.ndarray) -> None:
    d = angles.shape[-1]
    head = [f"t{k}" for k in range(2, d + 1)] + ["branch"] + [f"mu_1{k}" for k in range(2, d + 1)] + ["verdict"]
    out.write(",".join(head) + "\n")
    b = "" if branch is None else str(branch)
    for a, m, c in zip(angles, mu, cls):
        fields = [_fmt(x) for x in a[1:]] + [b] + [_fmt(x) for x in m] + [_VERDICT_OF[CellClass(c)].value]
        out.write(",".join(fields) + "\n")


def _pgm_bytes(levels: np.ndarray) -> bytes:
    h, w = levels.shape
    lines = ["P2", f"{w} {h}", "255"]
    lines += [" ".join(str(int(v)) for v in row) for row in levels]
    return ("\n".join(lines) + "\n").encode("ascii")


def mask_to_pgm(mask: np.ndarray) -> bytes:
    return _pgm_bytes(np.where(mask, 0, 255))


def read_pgm(data: bytes) -> np.ndarray:
    tokens = data.decode("ascii").split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h = int(tokens[1]), int(tokens[2])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)
