"""Search grids, indicator fields, analytic masks, and contrast metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .trajectory import Strip, ThetaDomain


@dataclass(frozen=True, eq=False)
class SearchGrid:
    """Uniform rectangular lattice, endpoints included on every axis."""

    bounds: tuple
    resolution: tuple

    def __post_init__(self):
        if len(self.bounds) not in (2, 3) or len(self.bounds) != len(self.resolution):
            raise ValueError("bounds/resolution must describe 2 or 3 axes")
        for (lo, hi), r in zip(self.bounds, self.resolution):
            if not lo < hi:
                raise ValueError(f"degenerate axis bounds [{lo}, {hi}]")
            if r < 2:
                raise ValueError("resolution must be at least 2 per axis")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def shape(self) -> tuple:
        return tuple(self.resolution)

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, r)
                for (lo, hi), r in zip(self.bounds, self.resolution)]

    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (r - 1)
                         for (lo, hi), r in zip(self.bounds, self.resolution)])

    def points(self) -> np.ndarray:
        """Row-major lattice points, shape (size, dim); last axis fastest."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(eq=False)
class ScalarField:
    """Values over a SearchGrid in row-major order plus run metadata."""

    grid: SearchGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got {v.shape}")
        self.values = v

    def reshaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


@dataclass(frozen=True)
class SliceSpec:
    """Axis-aligned plane: fix `axis` at `offset`."""

    axis: int
    offset: float


def make_grid(bounds, resolution) -> SearchGrid:
    """Uniform lattice over per-axis [lo, hi] with the given point counts."""
    return SearchGrid(tuple(tuple(b) for b in bounds), tuple(resolution))


def evaluate_field(fn, grid: SearchGrid) -> ScalarField:
    """Apply a point closure to every lattice point in row-major order."""
    vals = np.array([float(fn(p)) for p in grid.points()])
    return ScalarField(grid, vals)


def slice_grid(grid3: SearchGrid, spec: SliceSpec):
    """2D grid of the remaining axes plus the 3D points on the slice plane.

    Off-lattice offsets are snapped to the nearest lattice plane with a
    warning; returns (grid2, points3, snapped_offset).
    """
    if grid3.dim != 3:
        raise ValueError("slicing needs a 3D grid")
    if not 0 <= spec.axis < 3:
        raise ValueError("slice axis out of range")
    lo, hi = grid3.bounds[spec.axis]
    if not lo <= spec.offset <= hi:
        raise ValueError(f"slice offset {spec.offset} outside [{lo}, {hi}]")
    axis_vals = grid3.axes()[spec.axis]
    idx = int(np.argmin(np.abs(axis_vals - spec.offset)))
    snapped = float(axis_vals[idx])
    if abs(snapped - spec.offset) > 1e-12:
        warnings.warn(f"slice offset {spec.offset} snapped to lattice plane "
                      f"{snapped}", stacklevel=2)
    keep = [a for a in range(3) if a != spec.axis]
    grid2 = make_grid([grid3.bounds[a] for a in keep],
                      [grid3.resolution[a] for a in keep])
    pts2 = grid2.points()
    pts3 = np.empty((grid2.size, 3))
    pts3[:, keep[0]] = pts2[:, 0]
    pts3[:, keep[1]] = pts2[:, 1]
    pts3[:, spec.axis] = snapped
    return grid2, pts3, snapped


def slice_field_3d(fn, grid3: SearchGrid, spec: SliceSpec) -> ScalarField:
    """Evaluate a 3D point closure on one lattice plane; returns a 2D field."""
    grid2, pts3, snapped = slice_grid(grid3, spec)
    vals = np.array([float(fn(p)) for p in pts3])
    return ScalarField(grid2, vals,
                       metadata={"slice_axis": spec.axis, "slice_offset": snapped})


def mask_strip(grid: SearchGrid, s: Strip) -> np.ndarray:
    """Boolean membership of each lattice point in the strip."""
    return s.contains_many(grid.points())


def mask_theta(grid: SearchGrid, domain: ThetaDomain) -> np.ndarray:
    """Boolean membership in the strip intersection (all False when empty)."""
    return domain.contains_many(grid.points())


def contrast_metric(fld: ScalarField, mask: np.ndarray,
                    margin: float = 0.25) -> dict:
    """Inside/outside medians of a field against a boolean mask.

    Outside points within `margin` of the mask (Euclidean distance over
    the lattice) are excluded, so the indicator's smooth shoulder at the
    strip boundary does not dilute the outside statistic.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any() or mask.all():
        raise ValueError("mask must be nonempty and non-full")
    shaped = mask.reshape(fld.grid.shape)
    dist = ndimage.distance_transform_edt(~shaped, sampling=fld.grid.spacing())
    outside = (~mask) & (dist.ravel() > margin)
    if not outside.any():
        raise ValueError("no outside points remain after margin exclusion")
    inside_median = float(np.median(fld.values[mask]))
    outside_median = float(np.median(fld.values[outside]))
    ratio = inside_median / outside_median if outside_median > 0 else float("inf")
    return {"inside_median": inside_median,
            "outside_median": outside_median,
            "ratio": ratio}


def normalize_field(fld: ScalarField) -> ScalarField:
    """Scale values so the maximum is 1; all-zero fields pass through."""
    top = float(np.max(fld.values))
    meta = dict(fld.metadata)
    if top <= 0.0:
        meta["zero_scale"] = True
        return ScalarField(fld.grid, fld.values.copy(), meta)
    meta["scale"] = top
    return ScalarField(fld.grid, fld.values / top, meta)


# ---------------------------------------------------------------------------
# Field CSV (x1,x2[,x3],w row-major) and text PGM heatmaps
# ---------------------------------------------------------------------------

def write_field_csv(path, fld: ScalarField) -> None:
    cols = [f"x{i + 1}" for i in range(fld.grid.dim)]
    pts = fld.grid.points()
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(cols) + ",w\n")
        for p, v in zip(pts, fld.values):
            f.write(",".join(f"{c:.17g}" for c in p) + f",{v:.17g}\n")


def write_mask_csv(path, grid: SearchGrid, mask: np.ndarray) -> None:
    cols = [f"x{i + 1}" for i in range(grid.dim)]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(cols) + ",w\n")
        for p, v in zip(grid.points(), np.asarray(mask, dtype=int)):
            f.write(",".join(f"{c:.17g}" for c in p) + f",{v}\n")


def read_field_csv(path, grid: SearchGrid) -> ScalarField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.size, grid.dim + 1):
        raise ValueError(f"{path}: field shape does not match the grid")
    if not np.allclose(data[:, :grid.dim], grid.points(), atol=1e-9):
        raise ValueError(f"{path}: lattice points do not match the grid")
    return ScalarField(grid, data[:, -1])


def write_pgm(path, fld: ScalarField) -> None:
    """8-bit max-normalized P2 heatmap; x1 left-right, x2 bottom-top."""
    if fld.grid.dim != 2:
        raise ValueError("PGM output is 2D only")
    top = float(np.max(fld.values))
    scale = 255.0 / top if top > 0 else 0.0
    img = np.rint(fld.reshaped() * scale).astype(int)  # [i1, i2]
    rows = img.T[::-1]  # top row = largest x2
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"P2\n{rows.shape[1]} {rows.shape[0]}\n255\n")
        for row in rows:
            f.write(" ".join(str(v) for v in row) + "\n")
