"""Quality indicators for minimization fronts."""

from __future__ import annotations

import csv
import math
import warnings
from pathlib import Path

import numpy as np

from . import kernels


class EmptyFront(ValueError):
    pass


class EmptySet(ValueError):
    pass


class DimensionUnsupported(ValueError):
    pass


def _as_front(front) -> np.ndarray:
    F = np.asarray(front, dtype=np.float64)
    if F.size == 0:
        return F.reshape(0, 2 if F.ndim < 2 else F.shape[-1])
    if F.ndim == 1:
        F = F[None, :]
    return F


def hypervolume_2d(front, reference_point, return_discarded: bool = False):
    """Exact dominated area of a bi-objective front.

    Points that do not strictly dominate ``reference_point`` are discarded
    (with a warning).  Dominated points inside the box contribute nothing.
    """
    F = _as_front(front)
    ref = np.asarray(reference_point, dtype=np.float64)
    if F.shape[1] != 2 or ref.shape != (2,):
        raise DimensionUnsupported("hypervolume_2d needs bi-objective points")
    if not np.isfinite(F).all():
        raise ValueError("front contains non-finite values")
    keep = np.all(F < ref, axis=1)
    discarded = int((~keep).sum())
    if discarded:
        warnings.warn(f"{discarded} point(s) do not dominate the reference point", stacklevel=2)
    F = np.ascontiguousarray(F[keep])
    if F.shape[0] == 0:
        raise EmptyFront("no point dominates the reference point")
    area = float(kernels.hv2d(F, float(ref[0]), float(ref[1])))
    return (area, discarded) if return_discarded else area


def hypervolume_or_zero(front, reference_point) -> float:
    """Like :func:`hypervolume_2d` but 0.0 for fronts with nothing inside the box."""
    F = _as_front(front)
    if F.shape[0] == 0:
        return 0.0
    F = F[np.all(F < np.asarray(reference_point), axis=1)]
    if F.shape[0] == 0:
        return 0.0
    return hypervolume_2d(F, reference_point)


def igd(front, reference_set) -> float:
    """Mean distance from each reference point to its nearest front point."""
    F = _as_front(front)
    R = _as_front(reference_set)
    if F.shape[0] == 0 or R.shape[0] == 0:
        raise EmptySet("front and reference set must be nonempty")
    if F.shape[1] != R.shape[1]:
        raise ValueError("front and reference set differ in dimension")
    return float(np.mean(kernels.igd_distance(np.ascontiguousarray(R), np.ascontiguousarray(F))))


def default_reference_point(fronts, margin: float = 0.1) -> np.ndarray:
    """Componentwise maximum over all fronts, pushed out by ``margin`` of its magnitude."""
    stacked = np.vstack([_as_front(f) for f in fronts if len(f)])
    hi = stacked.max(axis=0)
    return hi + np.maximum(margin * np.abs(hi), 1e-9)


def attainment_summary(fronts, level: float = 0.5) -> np.ndarray:
    """Minimal points of the region attained by at least ``ceil(level * R)`` runs.

    A grid point built from observed coordinates is attained by a run when a
    member of that run's front weakly dominates it.  The returned array holds
    the staircase corners sorted by the first objective ascending (second
    strictly descending); use :func:`staircase_polyline` for plotting vertices.
    """
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    runs = [_as_front(f) for f in fronts]
    if not runs:
        raise ValueError("need at least one run")
    if any(r.shape[0] and r.shape[1] != 2 for r in runs):
        raise DimensionUnsupported("attainment surfaces are implemented for two objectives")
    need = math.ceil(level * len(runs) - 1e-12)
    xs = np.unique(np.concatenate([r[:, 0] for r in runs if len(r)]))
    # y_r(x): best second objective run r reaches using members with first objective <= x
    thresholds = np.full((len(runs), len(xs)), np.inf)
    for i, r in enumerate(runs):
        if not len(r):
            continue
        order = np.argsort(r[:, 0], kind="mergesort")
        pos = np.searchsorted(r[order, 0], xs, side="right")
        prefix = np.minimum.accumulate(r[order, 1])
        ok = pos > 0
        thresholds[i, ok] = prefix[pos[ok] - 1]
    boundary = np.sort(thresholds, axis=0)[need - 1]
    corners = []
    best = np.inf
    for x, y in zip(xs, boundary):
        if y < best:
            corners.append((x, y))
            best = y
    return np.array(corners, dtype=np.float64).reshape(-1, 2)


def staircase_polyline(corners, reference_point) -> np.ndarray:
    """Vertices of the attainment boundary from the top-left edge to the bottom-right edge."""
    C = _as_front(corners)
    ref = np.asarray(reference_point, dtype=np.float64)
    pts = [(C[0, 0], ref[1])]
    for i, (x, y) in enumerate(C):
        pts.append((x, y))
        nxt = C[i + 1, 0] if i + 1 < len(C) else ref[0]
        pts.append((nxt, y))
    return np.array(pts)


def write_polyline_csv(path, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f1", "f2"])
        for x, y in np.asarray(points):
            w.writerow([repr(float(x)), repr(float(y))])


def read_polyline_csv(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["f1"]), float(r["f2"])] for r in rows]).reshape(-1, 2)
