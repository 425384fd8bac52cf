"""Noise-scale calibration for the l2, Laplace and Gaussian mechanisms.

Each calibrator returns the smallest noise scale (within a search
tolerance) whose privacy certificate passes for the requested
(epsilon, delta) pair, for a statistic with unit l2-sensitivity unless
a different sensitivity is given (scales multiply through linearly).

The l2 mechanism is searched against the certified Riemann check from
lossbounds; sigma = 1/epsilon always passes (the loss region is empty
there), so the bracket's upper end is trivially valid.  In one
dimension the check collapses to a closed form whose minimal sigma is
1/(epsilon - 2 ln(1 - delta)), used directly.  The Gaussian calibrator
binary-searches the exact normal-CDF condition (dimension-independent
for l2-sensitivity); the Laplace scale sqrt(d)/(epsilon + delta) is a
closed-form choice sitting just above the exact threshold, which is
also provided for reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lossbounds import GridDomainError, check_approx_dp
from .specfun import std_normal_cdf

__all__ = [
    "PrivacyParams",
    "CalibrationResult",
    "MECHANISMS",
    "calibrate_l2",
    "calibrate_gaussian",
    "laplace_sigma",
    "laplace_sigma_lower_bound",
    "gaussian_dp_lhs",
]

MECH_L2 = "l2"
MECH_LAPLACE = "laplace"
MECH_GAUSSIAN = "gaussian"
MECHANISMS = (MECH_L2, MECH_LAPLACE, MECH_GAUSSIAN)

_MAX_SEARCH = 200
_ULP_BUMP = 1.0 + 4.0 * float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class PrivacyParams:
    """An (epsilon, delta) approximate-DP target; both strictly bounded."""

    epsilon: float
    delta: float

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            problems.append("epsilon must be positive and finite")
        if not (np.isfinite(self.delta) and 0.0 < self.delta < 1.0):
            problems.append("delta must lie strictly in (0, 1)")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class CalibrationResult:
    """A calibrated noise scale and how it was found.

    pure_epsilon is the pure-DP guarantee implied by the scale (None for
    the Gaussian, which has none); search_iterations counts certificate
    evaluations (0 for closed forms).  hit_bracket_floor flags the
    degenerate case where the certificate already passed at the lowest
    sigma probed, so the returned value is a ceiling, not a minimum.
    """

    mechanism: str
    sigma: float
    pure_epsilon: float | None
    search_iterations: int
    tolerance: float
    hit_bracket_floor: bool = False

    def __post_init__(self):
        problems = []
        if self.mechanism not in MECHANISMS:
            problems.append(f"mechanism must be one of {MECHANISMS}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            problems.append("sigma must be positive and finite")
        if self.tolerance < 0:
            problems.append("tolerance must be nonnegative")
        if problems:
            raise ValueError("; ".join(problems))


def _validate_common(params: PrivacyParams, tol: float, sensitivity: float) -> None:
    problems = []
    if not isinstance(params, PrivacyParams):
        problems.append("params must be a PrivacyParams")
    if not (np.isfinite(tol) and tol > 0):
        problems.append("tol must be positive and finite")
    if not (np.isfinite(sensitivity) and sensitivity > 0):
        problems.append("sensitivity must be positive and finite")
    if problems:
        raise ValueError("; ".join(problems))


def calibrate_l2(
    dim: int,
    params: PrivacyParams,
    n_r: int = 1000,
    n_R: int = 1000,
    tol: float = 1e-3,
    tail_fraction: float = 0.01,
    sensitivity: float = 1.0,
) -> CalibrationResult:
    """Smallest certified sigma for the l2 mechanism in dim dimensions.

    Binary search over the certified check on [tol, 1/epsilon]; probes
    whose grid cannot resolve the loss region (tiny sigma) count as not
    certified, which is always sound.  dim == 1 uses the exact closed
    form, nudged up by float ulps if needed until its own certificate
    passes, so the returned sigma is certified in every branch.
    """
    _validate_common(params, tol, sensitivity)
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValueError("dim must be an integer >= 1")
    eps = params.epsilon

    def certified(s: float) -> bool:
        try:
            report = check_approx_dp(dim, s, params, n_r, n_R, tail_fraction)
        except GridDomainError:
            return False
        return report.satisfies_dp

    evals = 0
    if dim == 1:
        sigma = 1.0 / (eps - 2.0 * math.log1p(-params.delta))
        for _ in range(_MAX_SEARCH):
            evals += 1
            if certified(sigma):
                return CalibrationResult(
                    MECH_L2, sigma * sensitivity, 1.0 / sigma, evals, tol
                )
            sigma *= _ULP_BUMP
        raise RuntimeError(
            "calibrate_l2: closed-form sigma failed its certificate repeatedly"
        )

    hi = 1.0 / eps
    lo = tol
    while lo >= hi:
        lo *= 0.5
    evals += 1
    if certified(lo):
        return CalibrationResult(
            MECH_L2, lo * sensitivity, 1.0 / lo, evals, tol, hit_bracket_floor=True
        )
    for _ in range(_MAX_SEARCH):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        evals += 1
        if certified(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise RuntimeError("calibrate_l2: binary search failed to converge")
    return CalibrationResult(MECH_L2, hi * sensitivity, 1.0 / hi, evals, tol)


def gaussian_dp_lhs(sigma: float, epsilon: float) -> float:
    """Exact hockey-stick value for the unit-sensitivity Gaussian.

    Phi(1/(2 sigma) - eps sigma) - e^eps Phi(-1/(2 sigma) - eps sigma);
    the mechanism is (eps, delta)-DP iff this is <= delta.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError("sigma must be positive and finite")
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise ValueError("epsilon must be positive and finite")
    a = 1.0 / (2.0 * sigma) - epsilon * sigma
    b = -1.0 / (2.0 * sigma) - epsilon * sigma
    return std_normal_cdf(a) - math.exp(min(epsilon, 700.0)) * std_normal_cdf(b)


def calibrate_gaussian(
    params: PrivacyParams, tol: float = 1e-3, sensitivity: float = 1.0
) -> CalibrationResult:
    """Smallest sigma for the Gaussian mechanism via the exact condition.

    The condition is dimension-free for unit l2-sensitivity, so no dim
    argument: the same sigma per coordinate works in every dimension.
    """
    _validate_common(params, tol, sensitivity)
    eps, delta = params.epsilon, params.delta

    evals = 0

    def passes(s: float) -> bool:
        nonlocal evals
        evals += 1
        return gaussian_dp_lhs(s, eps) <= delta

    hi = 1.0
    for _ in range(_MAX_SEARCH):
        if passes(hi):
            break
        hi *= 2.0
    else:
        raise RuntimeError("calibrate_gaussian: failed to bracket from above")
    lo = hi / 2.0
    for _ in range(_MAX_SEARCH):
        if not passes(lo):
            break
        hi = lo
        lo /= 2.0
        if lo < 1e-12:
            return CalibrationResult(
                MECH_GAUSSIAN,
                hi * sensitivity,
                None,
                evals,
                tol,
                hit_bracket_floor=True,
            )
    else:
        raise RuntimeError("calibrate_gaussian: failed to bracket from below")
    for _ in range(_MAX_SEARCH):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise RuntimeError("calibrate_gaussian: binary search failed to converge")
    return CalibrationResult(MECH_GAUSSIAN, hi * sensitivity, None, evals, tol)


def laplace_sigma(
    dim: int, params: PrivacyParams, sensitivity: float = 1.0
) -> CalibrationResult:
    """Closed-form Laplace scale sqrt(dim)/(epsilon + delta) per coordinate.

    An l2-sensitivity of 1 caps the l1-sensitivity at sqrt(dim); adding
    i.i.d. Laplace(scale) noise then gives pure sqrt(dim)/scale-DP, and
    this scale spends the whole (epsilon + delta) budget on it, which
    in particular implies (epsilon, delta)-DP.  Slightly above the
    exact minimum (see laplace_sigma_lower_bound).
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValueError("dim must be an integer >= 1")
    if not isinstance(params, PrivacyParams):
        raise ValueError("params must be a PrivacyParams")
    if not (np.isfinite(sensitivity) and sensitivity > 0):
        raise ValueError("sensitivity must be positive and finite")
    unit = math.sqrt(dim) / (params.epsilon + params.delta)
    return CalibrationResult(
        MECH_LAPLACE, unit * sensitivity, math.sqrt(dim) / unit, 0, 0.0
    )


def laplace_sigma_lower_bound(dim: int, params: PrivacyParams) -> float:
    """Exact minimal Laplace scale sqrt(dim)/(epsilon - 2 ln(1 - delta)).

    Below this scale the mechanism provably fails (epsilon, delta)-DP
    for the worst-case pair at l1-distance sqrt(dim); the closed-form
    choice above exceeds it by O(delta) relative, never the reverse.
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise ValueError("dim must be an integer >= 1")
    if not isinstance(params, PrivacyParams):
        raise ValueError("params must be a PrivacyParams")
    return math.sqrt(dim) / (params.epsilon - 2.0 * math.log1p(-params.delta))
