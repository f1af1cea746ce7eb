"""Layer 1: compactly supported wavelets with exact discrete vanishing
moments, dyadic dilation, convolution, and max pooling into Dirac trains.

The mother wavelet is built as the (m+1)-fold finite difference of a smooth
bump sampled on the grid.  Summing such taps against any sampled polynomial
of degree <= m telescopes to an exact zero, so the moment conditions hold to
machine precision rather than to a discretization error.  Dilation repeats
each tap 2^ell times at amplitude 2^-ell, which samples the dilated
piecewise-constant mother wavelet exactly and preserves both the discrete
L1 mass and the vanishing moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    GridTooCoarseError,
    PreconditionError,
    SeparationViolationError,
    StepMismatchError,
)
from .signals import PiecewisePolynomial, SampledSignal, SparseSignal

#: Relative floor below which pooled samples are treated as numerical zero.
POOL_FLOOR_REL = 1e-9

#: Moment sums are accepted as vanishing below this relative level.
MOMENT_RTOL = 1e-9


@dataclass(frozen=True)
class MotherWavelet:
    """Sampled mother wavelet with support inside [-1, 1].

    ``moment_order`` counts the verified discrete vanishing moments (at
    least m+1 by construction); the peak absolute tap value is 1 and
    ``normalization`` records the divisor that achieved it.
    """

    taps: SampledSignal
    moment_order: int
    normalization: float

    def __post_init__(self):
        pos = self.taps.positions()
        if pos[0] < -1.0 - 1e-12 or pos[-1] > 1.0 + 1e-12:
            raise PreconditionError("wavelet taps must be supported in [-1, 1]")


def moment_sums(taps: SampledSignal, orders) -> np.ndarray:
    """Discrete moments h * sum_n taps[n] * t_n^q for each q in orders."""
    t = taps.positions()
    return np.array(
        [taps.step * np.sum(taps.values * t**q) for q in orders]
    )


def count_vanishing_moments(taps: SampledSignal, max_check: int = 16) -> int:
    scale = taps.step * np.sum(np.abs(taps.values))
    count = 0
    for q in range(max_check):
        if abs(moment_sums(taps, [q])[0]) <= MOMENT_RTOL * scale:
            count += 1
        else:
            break
    return count


def make_wavelet(m: int, h: float) -> MotherWavelet:
    """Mother wavelet with at least m+1 vanishing moments on the step-h grid.

    Raises ``GridTooCoarseError`` unless [-1, 1] holds at least 2(m+2)+1
    grid points.
    """
    if m < 0:
        raise PreconditionError("m must be >= 0")
    if h <= 0:
        raise PreconditionError("h must be positive")
    n_half = int(np.floor(1.0 / h + 1e-12))
    if 2 * n_half + 1 < 2 * (m + 2) + 1:
        raise GridTooCoarseError(
            f"step {h} leaves only {2 * n_half + 1} grid points in [-1, 1]; "
            f"need at least {2 * (m + 2) + 1} for m={m}"
        )
    # Keep the whole tap support narrower than the pooling window (width
    # below 1 before dilation): every point of a knot response then sees the
    # response peak inside its pooling window, which pins one spike per knot.
    nb = max(1, (n_half - m - 1) // 2)
    idx = np.arange(-(nb + m + 1), nb + m + 2)
    u = idx / nb
    inside = np.abs(u) < 1.0
    bump = np.zeros(len(idx))
    bump[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    # the m+1 exact zero pads per side make the (m+1)-fold difference
    # telescope against sampled polynomials with no boundary term
    taps = np.diff(bump, n=m + 1)
    nonzero = np.nonzero(taps)[0]
    taps = taps[nonzero[0] : nonzero[-1] + 1]
    peak = np.max(np.abs(taps))
    taps = taps / peak
    start = idx[0] + nonzero[0] + (m + 1) // 2
    sampled = SampledSignal(origin=start * h, step=h, values=taps)
    pos = sampled.positions()
    if pos[0] < -1.0 or pos[-1] + h > 1.0 + 1e-12:
        raise GridTooCoarseError("tap support escaped [-1, 1]; decrease h")
    order = count_vanishing_moments(sampled)
    if order < m + 1:
        raise GridTooCoarseError(f"only {order} vanishing moments achieved for m={m}")
    return MotherWavelet(taps=sampled, moment_order=order, normalization=float(peak))


def dilate(psi: MotherWavelet, ell: int) -> SampledSignal:
    """Samples of 2^-ell * psi(t / 2^ell) on the same step.

    Each mother tap is repeated 2^ell times at amplitude 2^-ell, so the
    support grows to [-2^ell, 2^ell] while the discrete L1 mass and the
    vanishing moments carry over exactly.
    """
    if ell < 0:
        raise PreconditionError("ell must be >= 0")
    factor = 2**ell
    taps = psi.taps
    values = np.repeat(taps.values, factor) / factor
    origin_index = round(taps.origin / taps.step) * factor
    return SampledSignal(origin=origin_index * taps.step, step=taps.step, values=values)


def convolve(signal: SampledSignal, filt: SampledSignal, mode: str = "full") -> SampledSignal:
    """Discrete convolution scaled by the step (Riemann approximation of the
    continuous convolution).

    ``full`` keeps every output sample (origin = sum of origins); ``valid``
    keeps only samples whose filter support lies inside the sampled domain,
    so boundary artifacts cannot masquerade as knots.
    """
    if abs(signal.step - filt.step) > 1e-12 * max(signal.step, filt.step):
        raise StepMismatchError(f"steps differ: {signal.step} vs {filt.step}")
    h = signal.step
    if mode == "full":
        vals = np.convolve(signal.values, filt.values) * h
        return SampledSignal(origin=signal.origin + filt.origin, step=h, values=vals)
    if mode == "valid":
        if len(signal) < len(filt):
            raise PreconditionError("signal shorter than filter in valid mode")
        vals = np.convolve(signal.values, filt.values, mode="valid") * h
        origin = signal.origin + filt.origin + (len(filt) - 1) * h
        return SampledSignal(origin=origin, step=h, values=vals)
    raise PreconditionError(f"unknown convolution mode {mode!r}")


def max_pool(z: SampledSignal, ell: int, h: float | None = None) -> SparseSignal | None:
    """Keep samples that attain the maximum of z over the centered window
    [t - 2^ell, t + 2^ell] and exceed a relative floor; within each run of
    survivors spaced closer than 2^ell, keep only the leftmost.

    Returns None for an empty result (identically zero input).
    """
    if h is None:
        h = z.step
    elif abs(h - z.step) > 1e-12 * max(h, z.step):
        raise StepMismatchError(f"pooling step {h} differs from sample step {z.step}")
    vals = np.real_if_close(z.values)
    if np.iscomplexobj(vals) or np.any(vals < 0):
        raise PreconditionError("max pooling expects nonnegative input; apply a modulus first")
    radius = int(np.floor(2**ell / h + 1e-9))
    window_max = ndimage.maximum_filter1d(vals, size=2 * radius + 1, mode="constant", cval=0.0)
    floor = POOL_FLOOR_REL * np.max(vals) if np.max(vals) > 0 else np.inf
    keep = np.nonzero((vals >= window_max) & (vals > floor))[0]
    if len(keep) == 0:
        return None
    survivors = [keep[0]]
    prev = keep[0]
    for idx in keep[1:]:
        if idx - prev >= radius:
            survivors.append(idx)
        prev = idx
    survivors = np.array(survivors)
    positions = z.origin + survivors * z.step
    return SparseSignal(positions, vals[survivors])


def sample_piecewise(y: PiecewisePolynomial, h: float) -> SampledSignal:
    """Samples of y on the grid h*Z restricted to its domain."""
    lo, hi = y.domain
    n0 = int(np.ceil(lo / h - 1e-9))
    n1 = int(np.floor(hi / h + 1e-9))
    if n1 < n0:
        raise PreconditionError("domain holds no grid point")
    t = np.arange(n0, n1 + 1) * h
    return SampledSignal(origin=n0 * h, step=h, values=y(t))


def sparsify(y: PiecewisePolynomial, ell: int, h: float) -> SparseSignal | None:
    """Full first layer: sample, convolve with the dilated wavelet, take the
    modulus, and max pool into a Dirac train.

    With knots separated by at least 2^(ell+1), the result has exactly one
    positive spike within 2^ell of each knot.  Knot-free inputs (or inputs
    whose pieces join smoothly enough) give None.
    """
    window = 2.0**ell
    if 2 * window > y.min_knot_separation():
        raise SeparationViolationError(
            f"2^(ell+1)={2 * window} exceeds the minimum knot gap "
            f"{y.min_knot_separation()}"
        )
    psi = make_wavelet(y.degree_bound, h)
    filt = dilate(psi, ell)
    samples = sample_piecewise(y, h)
    response = convolve(samples, filt, mode="valid")
    magnitude = SampledSignal(response.origin, response.step, np.abs(response.values))
    # a response below the annihilation floor of the input is numerical zero
    reference = np.max(np.abs(samples.values)) * h * np.sum(np.abs(filt.values))
    if np.max(magnitude.values) <= POOL_FLOOR_REL * reference:
        return None
    pooled = max_pool(magnitude, ell, h)
    if pooled is None:
        return None
    return SparseSignal(pooled.locations, pooled.amplitudes, grid_step=h)
