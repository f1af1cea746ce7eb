"""Core signal types: Dirac trains, piecewise polynomials, sampled signals,
difference multisets, and the translation / reflection / sign symmetry group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GridMismatchError, PreconditionError

#: Absolute tolerance used when grouping pairwise differences into a multiset.
DIFF_MATCH_TOL = 1e-12

#: Relative tolerance for membership of a location in the grid h*Z.
GRID_MEMBERSHIP_RTOL = 1e-12


def _readonly(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SparseSignal:
    """A grid-free Dirac train sum_j a_j * delta(t - v_j).

    Locations are strictly increasing, amplitudes are nonzero reals.  When
    ``grid_step`` is set, every location must be an integer multiple of it
    (within a 1e-12 relative tolerance).
    """

    locations: np.ndarray
    amplitudes: np.ndarray
    grid_step: float | None = None

    def __post_init__(self):
        locs = _readonly(self.locations)
        amps = _readonly(self.amplitudes)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "amplitudes", amps)
        if locs.ndim != 1 or amps.ndim != 1:
            raise PreconditionError("locations and amplitudes must be 1-D")
        if len(locs) != len(amps):
            raise PreconditionError(
                f"length mismatch: {len(locs)} locations vs {len(amps)} amplitudes"
            )
        if len(locs) < 1:
            raise PreconditionError("a sparse signal needs at least one spike")
        if np.any(np.diff(locs) <= 0):
            raise PreconditionError("locations must be strictly increasing")
        if np.any(amps == 0):
            raise PreconditionError("amplitudes must be nonzero")
        if self.grid_step is not None:
            h = float(self.grid_step)
            if h <= 0:
                raise PreconditionError("grid_step must be positive")
            q = locs / h
            off = np.abs(q - np.round(q))
            if np.any(off > GRID_MEMBERSHIP_RTOL * np.maximum(1.0, np.abs(q))):
                raise PreconditionError("locations are not on the grid h*Z")
            object.__setattr__(self, "grid_step", h)

    @property
    def k(self) -> int:
        return len(self.locations)

    def shift(self, tau: float) -> "SparseSignal":
        """Translate every spike by ``tau`` (grid alignment is dropped unless
        tau is itself a grid multiple)."""
        step = self.grid_step
        if step is not None:
            q = tau / step
            if abs(q - round(q)) > GRID_MEMBERSHIP_RTOL * max(1.0, abs(q)):
                step = None
        return SparseSignal(self.locations + tau, self.amplitudes, step)

    def reflect(self) -> "SparseSignal":
        """Mirror the signal about t = 0."""
        return SparseSignal(-self.locations[::-1], self.amplitudes[::-1], self.grid_step)

    def negate(self) -> "SparseSignal":
        return SparseSignal(self.locations, -self.amplitudes, self.grid_step)

    def to_dict(self) -> dict:
        d = {
            "locations": [float(v) for v in self.locations],
            "amplitudes": [float(a) for a in self.amplitudes],
        }
        if self.grid_step is not None:
            d["grid_step"] = float(self.grid_step)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SparseSignal":
        return cls(d["locations"], d["amplitudes"], d.get("grid_step"))

    @classmethod
    def from_json(cls, text: str) -> "SparseSignal":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PiecewisePolynomial:
    """A piecewise polynomial on a closed interval.

    ``knots`` are the k strictly increasing breakpoints, interior to
    ``domain``.  ``pieces`` holds k+1 coefficient lists in constant-first
    order (global coordinates); piece i applies on [knot_{i-1}, knot_i).
    """

    knots: np.ndarray
    pieces: tuple
    degree_bound: int
    domain: tuple

    def __post_init__(self):
        knots = _readonly(self.knots)
        object.__setattr__(self, "knots", knots)
        lo, hi = float(self.domain[0]), float(self.domain[1])
        object.__setattr__(self, "domain", (lo, hi))
        if lo >= hi:
            raise PreconditionError("empty domain")
        if knots.ndim != 1:
            raise PreconditionError("knots must be 1-D")
        if len(knots) and (knots[0] <= lo or knots[-1] >= hi):
            raise PreconditionError("knots must be interior to the domain")
        if np.any(np.diff(knots) <= 0):
            raise PreconditionError("knots must be strictly increasing")
        m = int(self.degree_bound)
        if m < 0:
            raise PreconditionError("degree_bound must be >= 0")
        object.__setattr__(self, "degree_bound", m)
        pieces = tuple(tuple(float(c) for c in p) for p in self.pieces)
        if len(pieces) != len(knots) + 1:
            raise PreconditionError(
                f"expected {len(knots) + 1} pieces, got {len(pieces)}"
            )
        for p in pieces:
            if len(p) == 0 or len(p) > m + 1:
                raise PreconditionError("piece degree exceeds the bound")
        object.__setattr__(self, "pieces", pieces)

    @property
    def k(self) -> int:
        return len(self.knots)

    def min_knot_separation(self) -> float:
        if len(self.knots) < 2:
            return np.inf
        return float(np.min(np.diff(self.knots)))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="right")
        out = np.empty_like(t, dtype=float)
        for i, coeffs in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = np.polynomial.polynomial.polyval(t[sel], list(coeffs))
        return out

    def to_dict(self) -> dict:
        return {
            "knots": [float(u) for u in self.knots],
            "pieces": [list(p) for p in self.pieces],
            "degree_bound": self.degree_bound,
            "domain": [self.domain[0], self.domain[1]],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePolynomial":
        degree = d.get("degree_bound")
        if degree is None:
            degree = max(len(p) for p in d["pieces"]) - 1
        return cls(d["knots"], tuple(tuple(p) for p in d["pieces"]), degree, tuple(d["domain"]))


@dataclass(frozen=True)
class SampledSignal:
    """Uniform samples ``values[n]`` taken at ``origin + n * step``."""

    origin: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))
        if self.step <= 0:
            raise PreconditionError("step must be positive")
        if vals.ndim != 1 or len(vals) == 0:
            raise PreconditionError("values must be a non-empty 1-D array")

    def positions(self) -> np.ndarray:
        return self.origin + self.step * np.arange(len(self.values))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DifferenceMultiset:
    """Multiset of positive pairwise location differences with multiplicities."""

    entries: tuple = field(default=())

    def __post_init__(self):
        ent = tuple((float(d), int(m)) for d, m in self.entries)
        if any(d <= 0 for d, _ in ent) or any(m <= 0 for _, m in ent):
            raise PreconditionError("differences and multiplicities must be positive")
        if any(ent[i][0] >= ent[i + 1][0] for i in range(len(ent) - 1)):
            raise PreconditionError("entries must be sorted by difference")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_differences(cls, diffs: Iterable[float], tol: float = DIFF_MATCH_TOL) -> "DifferenceMultiset":
        """Group raw differences that agree within ``tol`` (absolute)."""
        d = np.sort(np.asarray(list(diffs), dtype=float))
        entries = []
        i = 0
        while i < len(d):
            j = i
            while j + 1 < len(d) and d[j + 1] - d[j] <= tol:
                j += 1
            entries.append((float(np.mean(d[i : j + 1])), j - i + 1))
            i = j + 1
        return cls(tuple(entries))

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    def values(self) -> np.ndarray:
        return np.array([d for d, _ in self.entries])

    def expanded(self) -> np.ndarray:
        """All differences with repetition, sorted."""
        out = []
        for d, m in self.entries:
            out.extend([d] * m)
        return np.array(out)

    def matches(self, other: "DifferenceMultiset", tol: float = DIFF_MATCH_TOL) -> bool:
        a, b = self.expanded(), other.expanded()
        return len(a) == len(b) and bool(np.all(np.abs(a - b) <= tol))


def difference_set(x: SparseSignal) -> DifferenceMultiset:
    """All pairwise differences v_j - v_i for i < j, with multiplicities.

    A single spike yields the empty multiset; total multiplicity is
    k(k-1)/2.
    """
    v = x.locations
    if len(v) < 2:
        return DifferenceMultiset(())
    i, j = np.triu_indices(len(v), k=1)
    return DifferenceMultiset.from_differences(v[j] - v[i])


def is_collision_free(x: SparseSignal) -> bool:
    """True iff every pairwise difference occurs exactly once."""
    return all(m == 1 for _, m in difference_set(x).entries)


def _normalized(x: SparseSignal) -> SparseSignal:
    return x.shift(-float(x.locations[0]))


def canonicalize(x: SparseSignal) -> SparseSignal:
    """Deterministic representative of the translation/reflection/sign orbit.

    Translates the leftmost spike to 0, reflects if the reflected absolute
    amplitude sequence is lexicographically larger (ties keep the
    unreflected), then flips sign so the first amplitude is positive.
    Idempotent.
    """
    cand = _normalized(x)
    refl = _normalized(x.reflect())
    a, b = np.abs(cand.amplitudes), np.abs(refl.amplitudes)
    for ai, bi in zip(a, b):
        if bi > ai:
            cand = refl
            break
        if ai > bi:
            break
    if cand.amplitudes[0] < 0:
        cand = cand.negate()
    return cand


def equivalent_up_to_symmetry(x: SparseSignal, y: SparseSignal, tol: float) -> bool:
    """True iff some translation/reflection/sign copy of y matches x within
    ``tol`` entrywise (locations and amplitudes, absolute tolerance)."""
    if x.k != y.k:
        return False
    base = _normalized(x)
    for variant in (y, y.reflect()):
        v = _normalized(variant)
        if not np.allclose(v.locations, base.locations, rtol=0.0, atol=tol):
            continue
        for sign in (1.0, -1.0):
            if np.allclose(sign * v.amplitudes, base.amplitudes, rtol=0.0, atol=tol):
                return True
    return False


def embed_on_grid(x: SparseSignal, n: int | None = None) -> np.ndarray:
    """Dense amplitude vector of a grid signal (positions as indices)."""
    if x.grid_step is None:
        raise GridMismatchError("signal is not attached to a grid")
    idx = np.round(x.locations / x.grid_step).astype(int)
    shifted = idx - idx.min() if n is None else idx
    size = shifted.max() + 1 if n is None else n
    if np.any(shifted < 0) or np.any(shifted >= size):
        raise GridMismatchError("grid positions fall outside the requested size")
    out = np.zeros(size)
    out[shifted] = x.amplitudes
    return out


def signal_from_grid(amplitudes: Sequence[float], grid_step: float = 1.0) -> SparseSignal | None:
    """Sparse signal from a dense grid vector; None when all entries vanish."""
    amps = np.asarray(amplitudes, dtype=float)
    nz = np.nonzero(amps)[0]
    if len(nz) == 0:
        return None
    return SparseSignal(nz * grid_step, amps[nz], grid_step)
