"""Certified Riemann-sum bounds on the approximate-DP condition.

For the exp(-||y - center||_2 / sigma) mechanism with centers one unit
apart, the privacy loss at output y is (||y - e1|| - ||y||) / sigma and
the (epsilon, delta) guarantee holds iff

    P0[loss >= eps] - e^eps * P1[loss >= eps] <= delta,

where P0 / P1 put the noise at the two centers.  Both probabilities
decompose radially into spherical-cap masses; term1_upper_bound and
term2_lower_bound evaluate left Riemann-Stieltjes sums over the radial
CDF whose direction of error is certified (upper for the first term,
lower for the second), so the check can only err toward "not certified",
never toward a false guarantee.

check_approx_dp picks the working radius r_star so that only a
tail_fraction * delta sliver of radial mass lies beyond the grid, and
the tail contribution is bounded by the same cap-fraction logic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .capgeom import LossGeometry, cap_fraction, height_H, height_h
from .specfun import inv_reg_upper_gamma, reg_lower_gamma, reg_upper_gamma

if TYPE_CHECKING:  # pragma: no cover - type-only import, avoids a cycle
    from .calibrate import PrivacyParams

__all__ = [
    "GridSpec",
    "BoundReport",
    "GridDomainError",
    "term1_upper_bound",
    "term2_lower_bound",
    "check_approx_dp",
]

BRANCH_LARGE_SIGMA = "large_sigma"
BRANCH_ONE_DIM = "one_dim"
BRANCH_GENERAL = "general"


class GridDomainError(ValueError):
    """The working radius r_star fell at or below the first grid radius.

    Happens when sigma is so small that all but a sliver of the noise
    mass sits inside the innermost sphere of the loss region; the grid
    cannot resolve anything there, so rather than guessing we refuse.
    Callers probing tiny sigmas (calibration brackets) may treat this
    as "not certified".
    """


@dataclass(frozen=True)
class GridSpec:
    """Radial grid resolution for the two Riemann bounds.

    n_r / n_R are the grid sizes for the bound around the noise center
    and the shifted center; r_star is the outer radius shared by both
    (None until a check computes it from the tail rule).
    """

    n_r: int = 1000
    n_R: int = 1000
    r_star: float | None = None

    def __post_init__(self):
        problems = []
        for name, n in (("n_r", self.n_r), ("n_R", self.n_R)):
            if not (isinstance(n, (int, np.integer)) and n >= 2):
                problems.append(f"{name} must be an integer >= 2")
        if self.r_star is not None and not (
            np.isfinite(self.r_star) and self.r_star > 0
        ):
            problems.append("r_star must be positive and finite when set")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one certified (epsilon, delta) check.

    lhs_upper = term1_upper - e^epsilon * term2_lower by construction;
    satisfies_dp compares it against delta.  branch records which case
    produced the numbers: "large_sigma" (eps * sigma >= 1, loss region
    empty, both terms 0), "one_dim" (closed forms), or "general"
    (Riemann grids).  A False verdict means "not certified", not
    "violates DP".
    """

    term1_upper: float
    term2_lower: float
    lhs_upper: float
    satisfies_dp: bool
    grid: GridSpec
    branch: str


def _validate_dse(dim, sigma, epsilon) -> None:
    problems = []
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        problems.append("dim must be an integer >= 1")
    if not (np.isfinite(sigma) and sigma > 0):
        problems.append("sigma must be positive and finite")
    if not (np.isfinite(epsilon) and epsilon > 0):
        problems.append("epsilon must be positive and finite")
    if problems:
        raise ValueError("; ".join(problems))


def _exp_eps(epsilon: float) -> float:
    # capping the exponent only lowers the subtracted term, which keeps
    # lhs_upper an upper bound while avoiding float overflow
    return math.exp(min(epsilon, 700.0))


def term1_upper_bound(dim: int, sigma: float, epsilon: float, grid: GridSpec) -> float:
    """Upper bound on P0[loss >= eps], the first hockey-stick term.

    Left Riemann-Stieltjes sum over the radial CDF: the sphere mass
    between consecutive radii is weighted by the cap fraction at the
    left radius (cap fractions shrink with radius, so this over-counts),
    the ball below the first grid radius is counted in full, and the
    mass beyond r_star is charged the cap fraction at r_star.
    """
    _validate_dse(dim, sigma, epsilon)
    tau = epsilon * sigma
    if tau >= 1.0:
        return 0.0
    if dim == 1:
        return 1.0 - 0.5 * math.exp(0.5 * (epsilon - 1.0 / sigma))
    if grid.r_star is None:
        raise ValueError("grid.r_star is required for the general branch")
    r_first = (1.0 - tau) / 2.0
    if grid.r_star <= r_first:
        raise GridDomainError(
            f"r_star={grid.r_star} is at or below the first grid radius "
            f"{r_first}; the grid cannot resolve the loss region"
        )
    geom = LossGeometry(dim, sigma, epsilon)
    radii = np.linspace(r_first, grid.r_star, grid.n_r)
    cdf = reg_lower_gamma(float(dim), radii / sigma)
    frac = cap_fraction(dim, radii, height_h(geom, radii))
    tail = reg_upper_gamma(float(dim), grid.r_star / sigma)
    total = cdf[0] + float(np.dot(np.diff(cdf), frac[:-1])) + tail * frac[-1]
    return min(total, 1.0)


def term2_lower_bound(dim: int, sigma: float, epsilon: float, grid: GridSpec) -> float:
    """Lower bound on P1[loss >= eps], the subtracted hockey-stick term.

    Same region as term1 but measured from the shifted center: spheres
    below radius (1 + tau)/2 miss the region entirely, and the cap
    fraction grows with radius, so weighting each mass increment by the
    left-endpoint fraction under-counts, as a lower bound must.
    """
    _validate_dse(dim, sigma, epsilon)
    tau = epsilon * sigma
    if tau >= 1.0:
        return 0.0
    if dim == 1:
        return 0.5 * math.exp(0.5 * (-epsilon - 1.0 / sigma))
    if grid.r_star is None:
        raise ValueError("grid.r_star is required for the general branch")
    r_first = (1.0 + tau) / 2.0
    if grid.r_star <= r_first:
        raise GridDomainError(
            f"r_star={grid.r_star} is at or below the first grid radius "
            f"{r_first} around the shifted center"
        )
    geom = LossGeometry(dim, sigma, epsilon)
    radii = np.linspace(r_first, grid.r_star, grid.n_R)
    cdf = reg_lower_gamma(float(dim), radii / sigma)
    frac = cap_fraction(dim, radii, height_H(geom, radii))
    tail = reg_upper_gamma(float(dim), grid.r_star / sigma)
    total = float(np.dot(np.diff(cdf), frac[:-1])) + tail * frac[-1]
    return max(total, 0.0)


def check_approx_dp(
    dim: int,
    sigma: float,
    eps_delta: "PrivacyParams",
    n_r: int = 1000,
    n_R: int = 1000,
    tail_fraction: float = 0.01,
) -> BoundReport:
    """Certified check that sigma gives (epsilon, delta)-DP in dim dims.

    The outer radius is set so the radial mass beyond it is exactly
    tail_fraction * delta (default: one percent of the privacy budget),
    then both Riemann bounds are evaluated on [first radius, r_star]
    grids.  satisfies_dp=True is a proof up to float arithmetic;
    False only means this grid could not certify the pair.
    """
    epsilon = float(eps_delta.epsilon)
    delta = float(eps_delta.delta)
    _validate_dse(dim, sigma, epsilon)
    if not (np.isfinite(delta) and 0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if not (np.isfinite(tail_fraction) and 0.0 < tail_fraction * delta < 1.0):
        raise ValueError("tail_fraction * delta must lie in (0, 1)")
    sigma = float(sigma)
    tau = epsilon * sigma
    r_star = sigma * inv_reg_upper_gamma(float(dim), tail_fraction * delta)
    grid = GridSpec(n_r=n_r, n_R=n_R, r_star=r_star)
    if tau >= 1.0:
        branch = BRANCH_LARGE_SIGMA
    elif dim == 1:
        branch = BRANCH_ONE_DIM
    else:
        branch = BRANCH_GENERAL
    t1 = term1_upper_bound(dim, sigma, epsilon, grid)
    t2 = term2_lower_bound(dim, sigma, epsilon, grid)
    lhs = t1 - _exp_eps(epsilon) * t2
    return BoundReport(
        term1_upper=t1,
        term2_lower=t2,
        lhs_upper=lhs,
        satisfies_dp=bool(lhs <= delta),
        grid=grid,
        branch=branch,
    )
