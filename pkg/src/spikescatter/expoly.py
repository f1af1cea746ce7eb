"""Generalized exponential polynomials sum_k alpha_k * exp(i*gamma_k*theta)
with arbitrary real frequencies, plus Monte-Carlo certificates for the
almost-everywhere statements the recovery guarantees rest on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisViolationError, PreconditionError

#: Frequencies closer than this are merged during arithmetic.
FREQ_MERGE_TOL = 1e-12

#: Coefficients below this times the largest magnitude are pruned.
COEFF_PRUNE_REL = 1e-14


@dataclass(frozen=True)
class ExpPoly:
    """Finite sum of complex exponentials with strictly increasing real
    frequencies and nonzero coefficients.

    The degree is the largest frequency.  Construction merges frequencies
    within ``FREQ_MERGE_TOL`` and prunes coefficients whose magnitude is
    below ``COEFF_PRUNE_REL`` times the largest one, so term lists are
    canonical.
    """

    frequencies: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if freqs.shape != coeffs.shape or freqs.ndim != 1:
            raise PreconditionError("frequencies and coefficients must be matching 1-D arrays")
        freqs, coeffs = _merge_terms(freqs, coeffs)
        if len(freqs) == 0:
            raise PreconditionError("an exponential polynomial needs at least one term")
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_terms(cls, terms: Sequence[tuple]) -> "ExpPoly":
        f = [t[0] for t in terms]
        c = [t[1] for t in terms]
        return cls(np.asarray(f, dtype=float), np.asarray(c, dtype=complex))

    @property
    def degree(self) -> float:
        return float(self.frequencies[-1])

    @property
    def terms(self) -> tuple:
        return tuple(zip(self.frequencies.tolist(), self.coefficients.tolist()))

    def __call__(self, theta) -> np.ndarray | complex:
        theta = np.asarray(theta, dtype=float)
        vals = np.exp(1j * np.outer(theta.ravel(), self.frequencies)) @ self.coefficients
        return vals.reshape(theta.shape) if theta.shape else complex(vals[0])

    def conjugate(self) -> "ExpPoly":
        return ExpPoly(-self.frequencies[::-1], np.conj(self.coefficients[::-1]))

    def shifted(self, delta: float) -> "ExpPoly":
        """Multiply by exp(i*delta*theta), shifting every frequency."""
        return ExpPoly(self.frequencies + delta, self.coefficients)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        f = np.add.outer(self.frequencies, other.frequencies).ravel()
        c = np.multiply.outer(self.coefficients, other.coefficients).ravel()
        return ExpPoly(f, c)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(
            np.concatenate([self.frequencies, other.frequencies]),
            np.concatenate([self.coefficients, other.coefficients]),
        )

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.frequencies, -self.coefficients)


def _merge_terms(freqs, coeffs):
    order = np.argsort(freqs, kind="stable")
    freqs, coeffs = freqs[order], coeffs[order]
    mf, mc = [], []
    for f, c in zip(freqs, coeffs):
        if mf and f - mf[-1] <= FREQ_MERGE_TOL:
            mc[-1] += c
        else:
            mf.append(float(f))
            mc.append(complex(c))
    mf = np.array(mf, dtype=float)
    mc = np.array(mc, dtype=complex)
    if len(mc):
        keep = np.abs(mc) > COEFF_PRUNE_REL * np.max(np.abs(mc))
        mf, mc = mf[keep], mc[keep]
    return mf, mc


def evaluate(p: ExpPoly, theta) -> np.ndarray | complex:
    """Evaluate the finite exponential sum at theta (scalar or array)."""
    return p(theta)


def multiply(p: ExpPoly, q: ExpPoly) -> ExpPoly:
    """Product with frequency addition and coefficient merging; degrees add
    unless the lead coefficients cancel."""
    return p * q


def modulus_squared(p: ExpPoly) -> ExpPoly:
    """Folded representation of |p(theta)|^2.

    The input is rebased so its minimum frequency is 0 (a unimodular factor
    that leaves the modulus unchanged), multiplied with its conjugate, and
    the Hermitian-symmetric negative-frequency half is folded into the
    positive one.  The real part of evaluating the result equals |p|^2
    pointwise, and its degree equals the degree of the rebased input.
    """
    q = p.shifted(-float(p.frequencies[0]))
    full = q * q.conjugate()
    freqs, coeffs = [], []
    for f, c in zip(full.frequencies, full.coefficients):
        if f < -FREQ_MERGE_TOL:
            continue
        if abs(f) <= FREQ_MERGE_TOL:
            freqs.append(0.0)
            coeffs.append(c)
        else:
            freqs.append(float(f))
            coeffs.append(2.0 * c)
    return ExpPoly(np.array(freqs), np.array(coeffs))


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one Monte-Carlo lemma certificate."""

    lemma: str
    trials: int
    passed: bool
    statistic: float
    threshold: float
    detail: str

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.lemma}: {status} over {self.trials} trials "
            f"(statistic {self.statistic:.6g}, threshold {self.threshold:.6g}) {self.detail}"
        )


LEMMAS = ("unique_representation", "zero_set_1", "four_p_solutions", "zero_set_2")

_EPS_NONZERO = 1e-9
_ZERO_FRACTION_MIN = 0.999
_THETA_SAMPLES = 4096
_SCAN_STEP = 1e-5


def _random_expoly(rng, degree: float, n_terms: int, base_zero: bool = True) -> ExpPoly:
    inner = np.sort(rng.uniform(0.0, degree, size=max(0, n_terms - 2)))
    freqs = np.concatenate([[0.0], inner, [degree]]) if base_zero else np.sort(
        rng.uniform(-degree, degree, size=n_terms)
    )
    coeffs = rng.normal(size=len(freqs)) + 1j * rng.normal(size=len(freqs))
    coeffs[np.abs(coeffs) < 0.1] += 0.5
    return ExpPoly(freqs, coeffs)


def _check_unique_representation(rng, trials: int) -> LemmaReport:
    # Nonzero term lists must give a function that is nonzero somewhere:
    # certified by finding a sample where |p| clearly exceeds roundoff.
    failures = 0
    for _ in range(trials):
        p = _random_expoly(rng, degree=rng.uniform(0.5, 5.0), n_terms=rng.integers(1, 7))
        theta = rng.uniform(0.0, 2 * np.pi, size=_THETA_SAMPLES)
        scale = np.max(np.abs(p.coefficients))
        if np.max(np.abs(p(theta))) <= _EPS_NONZERO * scale:
            failures += 1
    return LemmaReport(
        "unique_representation", trials, failures == 0, float(failures), 0.0,
        "nonzero term lists evaluated to a nonzero function on every trial"
        if failures == 0 else f"{failures} trials looked identically zero",
    )


def _check_zero_set_1(rng, trials: int, p_exp: int) -> LemmaReport:
    # |p1|^p + |p2|^p = |p3|^p + |p4|^p should fail off a measure-zero set
    # when degree(p1) dominates the other three.
    worst = 1.0
    for _ in range(trials):
        d1 = rng.uniform(2.0, 4.0)
        others = rng.uniform(0.2, 0.8 * d1, size=3)
        polys = [_random_expoly(rng, d1, int(rng.integers(2, 5)))]
        polys += [_random_expoly(rng, d, int(rng.integers(2, 5))) for d in others]
        if not (polys[0].degree > max(q.degree for q in polys[1:])):
            raise HypothesisViolationError("d1 must dominate d2, d3, d4")
        theta = rng.uniform(0.0, 2 * np.pi, size=_THETA_SAMPLES)
        lhs = np.abs(polys[0](theta)) ** p_exp + np.abs(polys[1](theta)) ** p_exp
        rhs = np.abs(polys[2](theta)) ** p_exp + np.abs(polys[3](theta)) ** p_exp
        scale = np.maximum(lhs, rhs) + 1e-300
        frac = np.mean(np.abs(lhs - rhs) > _EPS_NONZERO * scale)
        worst = min(worst, float(frac))
    return LemmaReport(
        "zero_set_1", trials, worst >= _ZERO_FRACTION_MIN, worst, _ZERO_FRACTION_MIN,
        f"worst nonzero fraction {worst:.6f} at p={p_exp}",
    )


def count_level_crossings(a: float, b: float, c: float, d: float, C: float,
                          p_exp: int, step: float = _SCAN_STEP) -> int:
    """Sign changes of |a+b e^(i theta)|^p - |c+d e^(i theta)|^p - C over a
    dense scan of [0, 2pi] (a lower bound on the number of solutions)."""
    theta = np.arange(0.0, 2 * np.pi + step, step)
    u = np.cos(theta)
    f = (a * a + b * b + 2 * a * b * u) ** (p_exp / 2.0) \
        - (c * c + d * d + 2 * c * d * u) ** (p_exp / 2.0) - C
    signs = np.sign(f)
    signs = signs[signs != 0]
    return int(np.sum(signs[1:] != signs[:-1]))


def _check_four_p_solutions(rng, trials: int, p_exp: int) -> LemmaReport:
    if p_exp % 2 == 0 or p_exp < 1:
        raise HypothesisViolationError("the solution-count bound needs odd p >= 1")
    worst = 0
    for _ in range(trials):
        while True:
            a, b, c, d = rng.uniform(-2.0, 2.0, size=4)
            if min(abs(a), abs(b), abs(c), abs(d)) > 0.1 and (
                abs(a * b - c * d) > 1e-6 or abs(a * a + b * b - c * c - d * d) > 1e-6
            ):
                break
        # anchor C at a random attained value so solutions exist
        theta0 = rng.uniform(0.0, 2 * np.pi)
        u0 = np.cos(theta0)
        C = (a * a + b * b + 2 * a * b * u0) ** (p_exp / 2.0) \
            - (c * c + d * d + 2 * c * d * u0) ** (p_exp / 2.0)
        worst = max(worst, count_level_crossings(a, b, c, d, C, p_exp))
    return LemmaReport(
        "four_p_solutions", trials, worst <= 4 * p_exp, float(worst), float(4 * p_exp),
        f"max crossings {worst} <= 4p={4 * p_exp}" if worst <= 4 * p_exp
        else f"found {worst} crossings, exceeding 4p={4 * p_exp}",
    )


def _check_zero_set_2(rng, trials: int, p_exp: int, kappa: float | None) -> LemmaReport:
    worst = 1.0
    for _ in range(trials):
        kap = kappa if kappa is not None else float(rng.uniform(1.2, 3.0) * rng.choice([-1, 1]))
        if abs(kap) < 1e-12 or abs(abs(kap) - 1.0) < 1e-12:
            raise HypothesisViolationError("kappa must differ from 0 and +/-1")
        a, b, c = rng.uniform(0.3, 2.0, size=3) * rng.choice([-1, 1], size=3)
        gamma = rng.uniform(0.2, 3.0)
        p1 = ExpPoly(np.array([0.0, 1.0, gamma + 1.0]), np.array([a, b, c], dtype=complex))
        p2 = ExpPoly(np.array([0.0, 1.0, gamma + 1.0]),
                     np.array([kap * a, b / kap, kap * c], dtype=complex))
        theta0 = rng.uniform(0.0, 2 * np.pi)
        C = abs(p1(theta0)) ** p_exp - abs(p2(theta0)) ** p_exp
        theta = rng.uniform(0.0, 2 * np.pi, size=_THETA_SAMPLES)
        diff = np.abs(p1(theta)) ** p_exp - np.abs(p2(theta)) ** p_exp - C
        scale = np.abs(p1(theta)) ** p_exp + np.abs(p2(theta)) ** p_exp + abs(C) + 1e-300
        frac = np.mean(np.abs(diff) > _EPS_NONZERO * scale)
        worst = min(worst, float(frac))
    return LemmaReport(
        "zero_set_2", trials, worst >= _ZERO_FRACTION_MIN, worst, _ZERO_FRACTION_MIN,
        f"worst nonzero fraction {worst:.6f} at p={p_exp}",
    )


def check_lemma_statement(lemma: str, params: dict | None = None,
                          trials: int = 100, seed: int = 0) -> LemmaReport:
    """Monte-Carlo certificate for one of the four almost-everywhere
    statements; a statistical check, not a proof."""
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    p_exp = int(params.get("p", 2))
    if lemma == "unique_representation":
        return _check_unique_representation(rng, trials)
    if lemma == "zero_set_1":
        return _check_zero_set_1(rng, trials, p_exp)
    if lemma == "four_p_solutions":
        return _check_four_p_solutions(rng, trials, int(params.get("p", 1)))
    if lemma == "zero_set_2":
        return _check_zero_set_2(rng, trials, p_exp, params.get("kappa"))
    raise PreconditionError(f"unknown lemma {lemma!r}; expected one of {LEMMAS}")
