"""Recovery of the difference multiset from measurement sweeps and of the
support set from the difference multiset.

Knot detection exploits that the norm_power sweep is piecewise linear in
the scale: consecutive-segment slopes are compared against a relative
threshold, breaking junctions are grouped, and knot locations are refined
by intersecting the clean flanking lines, which recovers breakpoints
exactly from exact piecewise-linear data.  The support is then rebuilt by
the classic largest-distance-first backtracking over the difference
multiset.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InconsistentMultisetError,
    InsufficientSamplesError,
    PreconditionError,
)
from .signals import DifferenceMultiset


@dataclass(frozen=True)
class KnotEstimate:
    """A detected slope change: location (a scale value), signed jump mass,
    and the ratio of the jump to the detection threshold."""

    location: float
    jump: float
    confidence: float

    def __post_init__(self):
        if self.location <= 0:
            raise PreconditionError("knot locations are positive scales")


def _line_through(s0, y0, s1, y1):
    slope = (y1 - y0) / (s1 - s0)
    return slope, y0 - slope * s0


def _collinear_groups(s: np.ndarray, y: np.ndarray, thr: float) -> list[tuple]:
    """Greedy walk splitting the samples into maximal collinear stretches.

    Each group is (first index, last index, slope, intercept).  A group is
    extended while the next segment's slope matches the group line within
    ``thr``; across a split, the new group reuses the boundary sample when
    the following two segments are collinear (the breakpoint sits exactly
    on that sample), otherwise it starts beyond the mixed segment.
    """
    n = len(s)
    groups = []
    i = 0
    while i < n - 1:
        j = i + 1
        slope, intercept = _line_through(s[i], y[i], s[j], y[j])
        while j + 1 < n:
            local = (y[j + 1] - y[j]) / (s[j + 1] - s[j])
            if abs(local - slope) > thr:
                break
            j += 1
        groups.append((i, j, slope, intercept))
        if j >= n - 1:
            return groups
        if j + 2 < n:
            nxt = (y[j + 1] - y[j]) / (s[j + 1] - s[j])
            after = (y[j + 2] - y[j + 1]) / (s[j + 2] - s[j + 1])
            i = j if abs(after - nxt) <= thr else j + 1
        else:
            i = j
    return groups


def detect_knots(sweep, rel_tol: float = 1e-6) -> list[KnotEstimate]:
    """Slope-change points of a sampled piecewise-linear sweep.

    ``sweep`` is a sequence of (scale, value) pairs with strictly increasing
    scales, at least 3 of them.  The samples are split into maximal
    collinear groups (slope agreement within rel_tol times the largest
    segment slope); consecutive group lines with distinct slopes intersect
    at a knot, whose jump is their slope difference.  On exact
    piecewise-linear data with at least two samples between consecutive
    breakpoints (and beyond the last one) the recovery is exact; a
    breakpoint falling on a sample is returned exactly as that sample.
    """
    pts = np.asarray(sweep, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InsufficientSamplesError("need at least 3 (scale, value) samples")
    s, y = pts[:, 0], pts[:, 1]
    if np.any(np.diff(s) <= 0):
        raise PreconditionError("scales must be strictly increasing")
    slopes = np.diff(y) / np.diff(s)
    max_slope = np.max(np.abs(slopes))
    thr = rel_tol * max_slope
    groups = _collinear_groups(s, y, thr)
    knots: list[KnotEstimate] = []
    for (ia, ja, ma, ba), (ib, jb, mb, bb) in zip(groups[:-1], groups[1:]):
        if abs(mb - ma) <= thr or ma == mb:
            continue
        loc = (ba - bb) / (mb - ma)
        loc = float(np.clip(loc, s[ja], s[ib]))
        if loc <= 0:
            continue
        jump = mb - ma
        conf = abs(jump) / thr if thr > 0 else np.inf
        knots.append(KnotEstimate(loc, float(jump), float(conf)))
    return knots


def _cluster(values: np.ndarray, tol: float) -> list[float]:
    if len(values) == 0:
        return []
    values = np.sort(values)
    out, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            out.append(float(np.mean(values[start:i])))
            start = i
    return out


def sweep_resolution(sweeps) -> float:
    """Coarsest median sample spacing across the sweeps."""
    res = 0.0
    for sweep in sweeps:
        s = np.asarray(sweep, dtype=float)[:, 0]
        if len(s) > 1:
            res = max(res, float(np.median(np.diff(s))))
    return res


def estimate_difference_set(sweeps: Sequence, freqs: Sequence[float],
                            rel_tol: float = 1e-6) -> DifferenceMultiset:
    """Union of detected knot locations across per-frequency sweeps,
    clustered within the scale-grid resolution; multiplicities are 1 in the
    collision-free regime."""
    if len(sweeps) < 1 or len(sweeps) != len(freqs):
        raise PreconditionError("need one sweep per frequency, at least one")
    locations = []
    for sweep in sweeps:
        arr = np.asarray(sweep, dtype=float)
        if arr[0, 0] > 0:
            arr = np.vstack([[0.0, 0.0], arr])  # norm_power sweeps vanish at s=0
        locations.extend(k.location for k in detect_knots(arr, rel_tol))
    res = sweep_resolution(sweeps)
    centers = _cluster(np.asarray(locations), max(res, 1e-12))
    return DifferenceMultiset(tuple((c, 1) for c in centers))


def _triangular_k(total: int) -> int:
    k = int(round((1 + np.sqrt(1 + 8 * total)) / 2))
    if k * (k - 1) // 2 != total:
        raise InconsistentMultisetError(
            f"{total} differences do not form a triangular count k(k-1)/2; "
            "either a knot was missed or the signal has difference collisions"
        )
    return k


def turnpike(diffs: DifferenceMultiset, grid_step: float = 1.0) -> list[np.ndarray]:
    """All point sets (min element 0) whose pairwise differences reproduce
    the multiset, one representative per reflection pair.

    Entries must lie on grid_step * Z.  Backtracking places 0 and the
    largest difference, then repeatedly explains the largest remaining
    difference with a point at that distance from either end, pruning when
    the induced sub-differences are missing.
    """
    scaled = diffs.expanded() / grid_step
    ints = np.round(scaled).astype(int)
    if np.any(np.abs(scaled - ints) > 1e-6):
        raise PreconditionError("differences are not on the grid_step lattice")
    k = _triangular_k(len(ints))
    if k == 1:
        return [np.zeros(1)]
    remaining = Counter(ints.tolist())
    width = max(remaining)
    remaining[width] -= 1
    if remaining[width] == 0:
        del remaining[width]
    solutions: set[tuple] = set()

    def place(points: list[int]):
        if not remaining:
            if len(points) == k:
                sol = tuple(sorted(points))
                mirrored = tuple(sorted(width - p for p in sol))
                solutions.add(min(sol, mirrored))
            return
        y = max(remaining)
        for candidate in {y, width - y}:
            if candidate in points:
                continue
            dists = [abs(candidate - p) for p in points]
            counts = Counter(dists)
            if all(remaining.get(d, 0) >= c for d, c in counts.items()):
                for d, c in counts.items():
                    remaining[d] -= c
                    if remaining[d] == 0:
                        del remaining[d]
                points.append(candidate)
                place(points)
                points.pop()
                for d, c in counts.items():
                    remaining[d] += c

    place([0, width])
    if not solutions:
        raise InconsistentMultisetError("no point set realizes the difference multiset")
    return [np.array(sol, dtype=float) * grid_step for sol in sorted(solutions)]


@dataclass(frozen=True)
class SupportEstimate:
    """Candidate support sets recovered from sweeps; ``ambiguous`` is set
    when several non-reflection-equivalent sets explain the data."""

    candidates: tuple
    differences: DifferenceMultiset
    ambiguous: bool


def recover_support(sweeps: Sequence, freqs: Sequence[float], grid_step: float,
                    rel_tol: float = 1e-6) -> SupportEstimate:
    """Difference-set estimation, grid snapping, and turnpike inversion."""
    detected = estimate_difference_set(sweeps, freqs, rel_tol)
    if not detected.entries:
        return SupportEstimate((np.zeros(1),), detected, ambiguous=False)
    snapped = np.round(detected.values() / grid_step) * grid_step
    snapped_set = DifferenceMultiset(tuple((float(d), 1) for d in np.sort(snapped)))
    candidates = turnpike(snapped_set, grid_step)
    return SupportEstimate(tuple(candidates), snapped_set, ambiguous=len(candidates) > 1)
