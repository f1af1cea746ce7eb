"""Constructive amplitude recovery from second-derivative jumps.

Adjacent-pair jumps at L random frequencies identify each pair product
a_i * a_{i+1} (and, except at p = 2, each pair sum of squares); chaining
the products leaves a one-parameter alternation family, which the provided
p-norm narrows to two candidates, and the four-term jump at the difference
v_3 - v_1 separates them for almost every frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    FitFailureError,
    InconsistentInvariantsError,
    InsufficientFrequenciesError,
    NumericalFailureError,
    PreconditionError,
    UnresolvableSignError,
)
from .gabor import second_derivative_jump
from .signals import SparseSignal, equivalent_up_to_symmetry
from .support import SupportEstimate, detect_knots, recover_support

#: Relative tolerance for the downstream sum-of-squares consistency checks.
CHAIN_RTOL = 1e-8

#: Relative tolerance for matching the disambiguation jump.
MATCH_RTOL = 1e-8


def required_frequencies(p: int) -> int:
    """Minimum number of distinct frequencies: p+2 for even p, 4p+2 for odd."""
    return p + 2 if p % 2 == 0 else 4 * p + 2


@dataclass(frozen=True)
class PairInvariants:
    """What the jumps reveal about one adjacent pair: the product
    a_i * a_{i+1}, the sum of squares a_i^2 + a_{i+1}^2, and the fit
    residual.  ``sum_identified`` is False when the sum of squares was
    completed from a family representative rather than fitted (the p = 2
    case without an extra magnitude sample)."""

    index: int
    product: float
    sum_squares: float
    fit_residual: float
    sum_identified: bool = True

    def __post_init__(self):
        if self.sum_squares < 2.0 * abs(self.product) * (1.0 - 1e-9) - 1e-12:
            raise PreconditionError(
                "sum of squares below twice the product magnitude (AM-GM)"
            )


def _distinct_angles(xis: np.ndarray, delta: float) -> int:
    theta = np.mod(xis * delta, 2 * np.pi)
    return len(np.unique(np.round(theta / 1e-9).astype(np.int64)))


def _pair_terms(alpha: float, beta_mag: float, p: int) -> float:
    return alpha**p + beta_mag**p


def _model_jump(u: np.ndarray, alpha: float, beta_mag: float, sign: float, p: int) -> np.ndarray:
    base = alpha**2 + beta_mag**2 + 2.0 * alpha * beta_mag * sign * u
    return np.maximum(base, 0.0) ** (p / 2.0) - _pair_terms(alpha, beta_mag, p)


def _sums_from_even_fit(u: np.ndarray, jumps: np.ndarray, p: int):
    """Linear route for even p = 2m >= 4: fit the degree-m polynomial in
    u = cos(theta) and read S and 2P off the two leading coefficients."""
    m = p // 2
    if len(np.unique(np.round(u / 1e-12).astype(np.int64))) < m + 1:
        raise InsufficientFrequenciesError(
            "fewer distinct cosine values than polynomial coefficients"
        )
    coeffs = np.polynomial.polynomial.polyfit(u, jumps, deg=m)
    lead, sub = coeffs[m], coeffs[m - 1]
    if abs(lead) <= 0:
        raise FitFailureError("vanishing lead coefficient; product appears to be zero")
    two_p_mag = abs(lead) ** (1.0 / m)
    sign = np.sign(lead) if m % 2 == 1 else np.sign(sub)
    two_p = two_p_mag * (sign if sign != 0 else 1.0)
    s_sum = sub / (m * two_p ** (m - 1))
    return float(s_sum), float(two_p / 2.0)


def fit_pair_invariants(jumps: Sequence[tuple], delta: float, p: int,
                        beta_power_sample: tuple | None = None,
                        fit_tol: float = 1e-6,
                        index: int = 0) -> PairInvariants:
    """Invert adjacent-pair jump samples (xi_l, jump value) at spacing
    ``delta`` into the pair product and sum of squares.

    p = 2 identifies only the product (the jump is 2 * P * cos(xi*delta));
    the sum of squares then needs ``beta_power_sample``, one sample
    (xi_0, |beta|^p) of the modulated pair magnitude.  Even p >= 4 uses a
    linear polynomial fit in cos(theta); odd p a bounded nonlinear fit.
    """
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    data = np.asarray([(x, j) for x, j in jumps], dtype=float)
    if data.ndim != 2 or data.shape[0] < 1:
        raise InsufficientFrequenciesError("no jump samples provided")
    xis, vals = data[:, 0], data[:, 1]
    need = required_frequencies(p)
    if _distinct_angles(xis, delta) < need:
        raise InsufficientFrequenciesError(
            f"need at least {need} distinct frequencies for p={p}, "
            f"got {_distinct_angles(xis, delta)}"
        )
    theta = xis * delta
    u = np.cos(theta)
    scale = max(float(np.linalg.norm(vals)), 1e-300)

    if p == 2:
        denom = float(np.dot(u, u))
        if denom <= 0:
            raise InsufficientFrequenciesError("cosine design is identically zero")
        product = float(np.dot(u, vals) / (2.0 * denom))
        predicted = 2.0 * product * u
        residual = float(np.linalg.norm(predicted - vals) / scale)
        if beta_power_sample is not None:
            xi0, power = beta_power_sample
            s_sum = float(power - 2.0 * product * np.cos(xi0 * delta))
            identified = True
        else:
            s_sum = 2.0 * abs(product)
            identified = False
    elif p % 2 == 0:
        s_sum, product = _sums_from_even_fit(u, vals, p)
        alpha, beta_mag, sign = _split_pair(s_sum, product)
        predicted = _model_jump(u, alpha, beta_mag, sign, p)
        residual = float(np.linalg.norm(predicted - vals) / scale)
        identified = True
    else:
        s_sum, product, residual = _fit_odd(u, vals, p)
        identified = True

    if residual > fit_tol:
        raise FitFailureError(
            f"pair fit residual {residual:.3e} exceeds tolerance {fit_tol:.3e}"
        )
    s_sum = max(s_sum, 2.0 * abs(product))
    return PairInvariants(index=index, product=product, sum_squares=s_sum,
                          fit_residual=residual, sum_identified=identified)


def _split_pair(s_sum: float, product: float):
    """Magnitudes (alpha >= beta) and product sign from (S, P)."""
    disc = max(s_sum * s_sum - 4.0 * product * product, 0.0)
    r_hi = (s_sum + np.sqrt(disc)) / 2.0
    r_lo = max(s_sum - r_hi, 0.0)
    return float(np.sqrt(r_hi)), float(np.sqrt(r_lo)), float(np.sign(product) or 1.0)


def _fit_odd(u: np.ndarray, vals: np.ndarray, p: int):
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    mag = scale ** (1.0 / p)
    best = None
    for sign in (1.0, -1.0):
        for a0, b0 in ((mag, mag), (2 * mag, 0.5 * mag), (0.5 * mag, 2 * mag),
                       (4 * mag, 0.25 * mag)):
            res = least_squares(
                lambda x: _model_jump(u, x[0], x[1], sign, p) - vals,
                x0=np.array([a0, b0]),
                bounds=(np.array([1e-12, 1e-12]), np.array([np.inf, np.inf])),
                xtol=1e-15, ftol=1e-15, gtol=1e-15,
            )
            cost = float(np.linalg.norm(res.fun))
            if best is None or cost < best[0]:
                best = (cost, res.x[0], res.x[1], sign)
    cost, alpha, beta_mag, sign = best
    s_sum = alpha**2 + beta_mag**2
    product = sign * alpha * beta_mag
    return float(s_sum), float(product), float(cost / max(np.linalg.norm(vals), 1e-300))


@dataclass(frozen=True)
class ChainResult:
    """Admissible amplitude representatives from chaining pair products.

    Every vector consistent with the products forms a one-parameter
    alternation family; each returned candidate is that family's
    representative for one admissible first amplitude (positive by
    convention, global sign quotiented)."""

    candidates: tuple
    sums_identified: bool


def chain_amplitudes(pairs: Sequence[PairInvariants], k: int) -> ChainResult:
    """Solve the first amplitude from the first pair's invariants (two
    roots), propagate a_{i+1} = product_i / a_i, and keep roots whose
    downstream sums of squares stay consistent within 1e-8 relative."""
    if len(pairs) != k - 1:
        raise PreconditionError(f"need {k - 1} pair invariants for k={k}, got {len(pairs)}")
    if any(pv.product == 0 for pv in pairs):
        raise PreconditionError("pair products must be nonzero")
    first = pairs[0]
    disc = max(first.sum_squares**2 - 4.0 * first.product**2, 0.0)
    roots_sq = [(first.sum_squares + np.sqrt(disc)) / 2.0,
                (first.sum_squares - np.sqrt(disc)) / 2.0]
    candidates = []
    for t in roots_sq:
        if t <= 0:
            continue
        a = np.empty(k)
        a[0] = np.sqrt(t)
        ok = True
        for i, pv in enumerate(pairs):
            a[i + 1] = pv.product / a[i]
            got = a[i] ** 2 + a[i + 1] ** 2
            if abs(got - pv.sum_squares) > CHAIN_RTOL * max(pv.sum_squares, 1e-300):
                ok = False
                break
        if ok and not any(np.allclose(a, c, rtol=1e-12, atol=0.0) for c in candidates):
            candidates.append(a)
    if not candidates:
        raise InconsistentInvariantsError(
            "no first-amplitude root is consistent with the downstream sums of squares"
        )
    return ChainResult(tuple(candidates), all(pv.sum_identified for pv in pairs))


def apply_alternation(amps: np.ndarray, c: float) -> np.ndarray:
    """Family action: odd-position amplitudes divided by c, even-position
    multiplied (1-based positions; preserves every adjacent product)."""
    out = np.array(amps, dtype=float)
    out[0::2] /= c
    out[1::2] *= c
    return out


def _norm_candidates(amps: np.ndarray, norm_p: float, p: int):
    """The at-most-two alternation parameters giving the target p-norm."""
    odd = float(np.sum(np.abs(amps[0::2]) ** p))
    even = float(np.sum(np.abs(amps[1::2]) ** p))
    q = norm_p**p
    if even == 0.0:  # single spike: norm fixes the magnitude directly
        return [float(np.abs(amps[0]) / norm_p)] if amps[0] != 0 else []
    disc = q * q - 4.0 * odd * even
    if disc < -1e-9 * q * q:
        raise InconsistentInvariantsError(
            "provided norm is inconsistent with the fitted pair products"
        )
    root = np.sqrt(max(disc, 0.0))
    ts = [(q + root) / (2.0 * even), (q - root) / (2.0 * even)]
    return [float(t ** (1.0 / p)) for t in ts if t > 0]


def resolve_alternation(representative: np.ndarray, norm_p: float, p: int,
                        extra_jump: tuple | None, support: np.ndarray,
                        match_rtol: float = MATCH_RTOL) -> np.ndarray:
    """Pick the alternation-family member with the target p-norm whose
    predicted four-term jump at v_3 - v_1 matches the measured one.

    For k <= 2 the norm alone resolves the family (the two norm-consistent
    members are reflections of each other).  Raises
    ``UnresolvableSignError`` when both candidates predict the same jump
    (measure-zero frequencies; redraw and retry).
    """
    amps = np.asarray(representative, dtype=float)
    support = np.asarray(support, dtype=float)
    if len(amps) != len(support):
        raise PreconditionError("amplitude and support lengths differ")
    k = len(amps)
    if norm_p <= 0:
        raise PreconditionError("norm_p must be positive")
    cs = _norm_candidates(amps, norm_p, p)
    if not cs:
        raise InconsistentInvariantsError("no positive alternation parameter fits the norm")
    members = [apply_alternation(amps, c) for c in cs]
    if len(members) == 1 or np.allclose(members[0], members[1], rtol=1e-9, atol=0.0):
        return members[0]
    if k <= 2:
        # both members are reflections of one another: either represents the orbit
        return members[0] if abs(np.log(cs[0])) <= abs(np.log(cs[1])) else members[1]
    if extra_jump is None:
        raise PreconditionError("k >= 3 needs a disambiguation jump at v_3 - v_1")
    xi_l, measured = float(extra_jump[0]), float(extra_jump[1])
    d13 = support[2] - support[0]
    preds = [second_derivative_jump(SparseSignal(support, m), d13, xi_l, p) for m in members]
    scale = max(abs(preds[0]), abs(preds[1]), abs(measured), 1e-300)
    if abs(preds[0] - preds[1]) <= match_rtol * scale:
        raise UnresolvableSignError(
            "both alternation candidates predict the same disambiguation jump"
        )
    errors = [abs(pr - measured) for pr in preds]
    best = int(np.argmin(errors))
    if errors[best] > match_rtol * scale:
        raise FitFailureError(
            f"no alternation candidate matches the measured jump "
            f"(best relative mismatch {errors[best] / scale:.3e})"
        )
    return members[best]


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered signal plus diagnostics for the caller and CLI."""

    signal: SparseSignal
    signals: tuple
    ambiguous: bool
    support: SupportEstimate
    pair_invariants: tuple
    alternation_parameters: tuple
    resolve_frequency: float | None
    fallback_count: int
    diagnostics: dict = field(default_factory=dict)


def _extract_jumps(sweeps, freqs, targets: np.ndarray, rel_tol: float,
                   match_tol: float) -> np.ndarray:
    """Per-frequency jump values at each target difference; undetected
    knots (jumps hiding below threshold) count as zero mass."""
    out = np.zeros((len(freqs), len(targets)))
    for row, sweep in enumerate(sweeps):
        arr = np.asarray(sweep, dtype=float)
        if arr[0, 0] > 0:
            arr = np.vstack([[0.0, 0.0], arr])  # norm_power sweeps vanish at s=0
        for est in detect_knots(arr, rel_tol):
            hits = np.nonzero(np.abs(targets - est.location) <= match_tol)[0]
            if len(hits):
                out[row, hits[0]] += est.jump
    return out


def recover_signal(sweeps: Sequence, freqs: Sequence[float], norm_p: float, p: int,
                   grid_step: float, rel_tol: float = 1e-6) -> RecoveryResult:
    """Full inversion: support from the sweeps, adjacent-pair jump fits,
    product chaining, and alternation resolution against the norm and the
    four-term jump.

    The sweeps must be norm_power measurements, one per frequency, on a
    scale grid fine enough for knot detection.
    """
    freqs = np.asarray(list(freqs), dtype=float)
    need = required_frequencies(p)
    if len(freqs) < need:
        raise InsufficientFrequenciesError(
            f"need at least {need} frequencies for p={p}, got {len(freqs)}"
        )
    est = recover_support(sweeps, freqs, grid_step, rel_tol)
    diag: dict = {"candidate_supports": [c.tolist() for c in est.candidates]}

    signals = []
    invariants_used: tuple = ()
    alternation_cs: tuple = ()
    resolve_freq = None
    fallbacks = 0
    unresolved = 0

    for support in est.candidates:
        k = len(support)
        if k == 1:
            signals.append(SparseSignal(support, [norm_p], grid_step))
            continue
        diffs = est.differences.values()
        jump_table = _extract_jumps(sweeps, freqs, diffs, rel_tol, grid_step / 2.0)
        gaps = np.diff(support)
        try:
            pairs = []
            for i, gap in enumerate(gaps):
                col = int(np.argmin(np.abs(diffs - gap)))
                ji = [(float(xi), float(jump_table[row, col])) for row, xi in enumerate(freqs)]
                pairs.append(fit_pair_invariants(ji, float(gap), p, index=i))
            if p == 2:
                # products alone leave the alternation family open: complete the
                # sums of squares from the chained representative itself
                rep = np.empty(k)
                rep[0] = np.sqrt(abs(pairs[0].product))
                for i, pv in enumerate(pairs):
                    rep[i + 1] = pv.product / rep[i]
                pairs = [
                    PairInvariants(pv.index, pv.product,
                                   float(rep[i] ** 2 + rep[i + 1] ** 2),
                                   pv.fit_residual, sum_identified=False)
                    for i, pv in enumerate(pairs)
                ]
            chained = chain_amplitudes(pairs, k)
        except (FitFailureError, InconsistentInvariantsError, InsufficientFrequenciesError):
            if len(est.candidates) == 1:
                raise
            continue

        d13_col = None
        if k >= 3:
            d13 = support[2] - support[0]
            d13_col = int(np.argmin(np.abs(diffs - d13)))
        for cand in chained.candidates:
            resolved = None
            for row in range(len(freqs) - 1, -1, -1):
                extra = None
                if d13_col is not None:
                    extra = (float(freqs[row]), float(jump_table[row, d13_col]))
                try:
                    resolved = resolve_alternation(cand, norm_p, p, extra, support)
                    resolve_freq = float(freqs[row])
                    break
                except UnresolvableSignError:
                    unresolved += 1
                    fallbacks += 1
                except FitFailureError:
                    fallbacks += 1
            if resolved is not None:
                sig = SparseSignal(support, resolved, grid_step)
                if not any(equivalent_up_to_symmetry(sig, s, 1e-9) for s in signals):
                    signals.append(sig)
                invariants_used = tuple(pairs)
                alternation_cs = tuple(_norm_candidates(cand, norm_p, p))

    if not signals:
        if unresolved:
            raise UnresolvableSignError(
                "every frequency left the alternation candidates tied; redraw frequencies"
            )
        raise NumericalFailureError("amplitude recovery failed on every candidate support")
    diag["fallbacks"] = fallbacks
    return RecoveryResult(
        signal=signals[0],
        signals=tuple(signals),
        ambiguous=len(signals) > 1,
        support=est,
        pair_invariants=invariants_used,
        alternation_parameters=alternation_cs,
        resolve_frequency=resolve_freq,
        fallback_count=fallbacks,
        diagnostics=diag,
    )
