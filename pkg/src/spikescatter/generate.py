"""Seeded random instances: collision-free Dirac trains on a grid and
piecewise polynomials honoring the sparsification separation bound."""

from __future__ import annotations

import numpy as np

from .errors import RejectionBudgetError
from .signals import PiecewisePolynomial, SparseSignal, is_collision_free

DEFAULT_MAX_TRIES = 10000


def random_sparse_signal(k: int, grid_size: int, rng, grid_step: float = 1.0,
                         amp_range: tuple = (0.5, 2.0),
                         max_tries: int = DEFAULT_MAX_TRIES) -> SparseSignal:
    """Collision-free k-spike signal on {0, ..., grid_size-1} * grid_step,
    found by rejection sampling on the collision-free predicate."""
    if k < 1:
        raise RejectionBudgetError("k must be at least 1")
    if k > grid_size:
        raise RejectionBudgetError(f"cannot place {k} distinct spikes on {grid_size} points")
    lo, hi = amp_range
    for _ in range(max_tries):
        positions = np.sort(rng.choice(grid_size, size=k, replace=False))
        amps = rng.uniform(lo, hi, size=k) * rng.choice([-1.0, 1.0], size=k)
        x = SparseSignal(positions * grid_step, amps, grid_step)
        if is_collision_free(x):
            return x
    raise RejectionBudgetError(
        f"no collision-free placement of k={k} spikes on a {grid_size}-point grid "
        f"after {max_tries} tries"
    )


def _shift_poly(local_coeffs: np.ndarray, center: float) -> np.ndarray:
    """Global constant-first coefficients of p((t - center))."""
    poly = np.polynomial.Polynomial(local_coeffs)
    shifted = poly(np.polynomial.Polynomial([-center, 1.0]))
    return shifted.coef


def random_piecewise_polynomial(k: int, m: int, domain: tuple, min_separation: float,
                                rng, coeff_scale: float = 1.0,
                                max_tries: int = DEFAULT_MAX_TRIES) -> PiecewisePolynomial:
    """Random degree <= m piecewise polynomial with k interior knots
    separated by at least ``min_separation`` (also kept from the domain
    boundary) and a non-negligible value jump at every knot."""
    lo, hi = float(domain[0]), float(domain[1])
    margin = min_separation
    usable = hi - lo - 2 * margin - (k - 1) * min_separation if k else hi - lo
    if k and usable < 0:
        raise RejectionBudgetError(
            f"domain of length {hi - lo} cannot hold {k} knots separated by {min_separation}"
        )
    for _ in range(max_tries):
        if k:
            slack = rng.uniform(0.0, 1.0, size=k + 1)
            slack = slack / slack.sum() * usable
            knots = lo + margin + np.cumsum(slack[:-1]) + min_separation * np.arange(k)
        else:
            knots = np.array([])
        bounds = np.concatenate([[lo], knots, [hi]])
        pieces = []
        for i in range(k + 1):
            center = 0.5 * (bounds[i] + bounds[i + 1])
            width = max(0.5 * (bounds[i + 1] - bounds[i]), 1e-9)
            local = rng.uniform(-1.0, 1.0, size=m + 1) * coeff_scale / width ** np.arange(m + 1)
            pieces.append(tuple(_shift_poly(local, center)))
        y = PiecewisePolynomial(knots, tuple(pieces), m, (lo, hi))
        jumps_ok = True
        for i, u in enumerate(knots):
            left = np.polynomial.polynomial.polyval(u, list(pieces[i]))
            right = np.polynomial.polynomial.polyval(u, list(pieces[i + 1]))
            if abs(left - right) < 0.1 * coeff_scale:
                jumps_ok = False
                break
        if jumps_ok:
            return y
    raise RejectionBudgetError("could not draw knots with clear value jumps")
