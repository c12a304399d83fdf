"""Lifespan experiments: epsilon sweeps, censoring-aware records, and fits
against the three regime laws (power law below threshold, exponential rate at
threshold, global survival above).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import ProblemSpec, RadialGrid
from .errors import GlasseyLabError, InsufficientData, PreconditionViolation
from .solver import DataProfile, evolve, make_profile

AGREEMENT_CUTOFF = 0.10
SLOPE_TOLERANCE = 0.20

SWEEP_COLUMNS = ("epsilon", "t_observed", "censored", "num_cells", "agreement")
FIT_COLUMNS = (
    "model",
    "slope",
    "intercept",
    "r_squared",
    "predicted_slope",
    "verdict",
    "tolerance",
    "r_squared_alt",
)


@dataclass(frozen=True)
class LifespanRecord:
    """One (epsilon, observed time) measurement from a resolution ladder."""

    epsilon: float
    t_observed: float
    censored: bool
    num_cells: int
    agreement: float

    def row(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "t_observed": self.t_observed,
            "censored": self.censored,
            "num_cells": self.num_cells,
            "agreement": self.agreement,
        }


@dataclass(frozen=True)
class FitResult:
    model: str  # "power_law" | "exponential_rate"
    slope: float
    intercept: float
    r_squared: float
    predicted_slope: float
    verdict: str  # "consistent" | "inconsistent"
    tolerance: float
    r_squared_alt: float = None

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0):
            raise PreconditionViolation(f"r_squared must lie in [0,1], got {self.r_squared}")

    def row(self) -> dict:
        return {
            "model": self.model,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "predicted_slope": self.predicted_slope,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "r_squared_alt": self.r_squared_alt,
        }


@dataclass(frozen=True)
class LawPrediction:
    regime: str  # "global" | "critical" | "subcritical"
    exponent: float = None  # power-law slope of T against epsilon
    rate_exponent: float = None  # log T grows like epsilon**rate_exponent


def predicted_law(spec: ProblemSpec) -> LawPrediction:
    """The regime and its scaling law for the given (n, p)."""
    n, p = spec.n_dim, spec.p
    p_c = spec.p_critical
    if p > p_c + 1e-9:
        return LawPrediction(regime="global")
    if abs(p - p_c) <= 1e-9:
        return LawPrediction(regime="critical", rate_exponent=1.0 - p)
    exponent = -2.0 * (p - 1.0) / (2.0 - (n - 1) * (p - 1.0))
    return LawPrediction(regime="subcritical", exponent=exponent)


def measure_lifespan(
    spec: ProblemSpec,
    profile: DataProfile,
    epsilon: float,
    ladder,
    horizon: float,
    r_max: float,
    cfl: float = 0.25,
    sample_stride: int = 10,
) -> LifespanRecord:
    """Blow-up time (or censoring horizon) across a grid-resolution ladder.

    agreement is the relative gap between the two finest rungs; runs whose
    rungs disagree on censoring get agreement = inf and are excluded by fits.
    """
    ladder = sorted(set(int(c) for c in ladder))
    if not 2 <= len(ladder) <= 3:
        raise PreconditionViolation("ladder needs 2 or 3 distinct resolutions")
    scaled = replace(profile, epsilon=epsilon)
    results = []
    for cells in ladder:
        grid = RadialGrid(r_max=r_max, num_cells=cells)
        data = make_profile(scaled, grid)
        outcome = evolve(
            spec,
            data.u0,
            data.u1,
            grid,
            horizon,
            cfl=cfl,
            sample_stride=sample_stride,
        )
        blew = outcome.status == "blew_up"
        results.append((blew, outcome.t_blowup if blew else horizon))

    (blew_next, t_next), (blew_fine, t_fine) = results[-2], results[-1]
    if blew_fine != blew_next:
        agreement = math.inf
    elif not blew_fine:
        agreement = 0.0
    else:
        agreement = abs(t_fine - t_next) / t_fine
    return LifespanRecord(
        epsilon=epsilon,
        t_observed=t_fine,
        censored=not blew_fine,
        num_cells=ladder[-1],
        agreement=agreement,
    )


def _sweep_one(args):
    spec, profile, eps, ladder, horizon, r_max, cfl, stride = args
    return measure_lifespan(
        spec, profile, eps, ladder, horizon, r_max, cfl=cfl, sample_stride=stride
    )


def sweep(
    spec: ProblemSpec,
    profile: DataProfile,
    epsilons,
    ladder,
    horizon: float,
    r_max: float,
    cfl: float = 0.25,
    sample_stride: int = 10,
    jobs: int = 1,
):
    """One record per epsilon, in epsilon order; a failed run is skipped with
    a warning rather than aborting the sweep."""
    eps = [float(e) for e in epsilons]
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise PreconditionViolation("epsilons must be strictly increasing")
    tasks = [(spec, profile, e, tuple(ladder), horizon, r_max, cfl, sample_stride) for e in eps]
    records = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_one, t) for t in tasks]
            for e, fut in zip(eps, futures):
                try:
                    records.append(fut.result())
                except GlasseyLabError as exc:
                    warnings.warn(f"epsilon={e}: {exc}")
    else:
        for e, task in zip(eps, tasks):
            try:
                records.append(_sweep_one(task))
            except GlasseyLabError as exc:
                warnings.warn(f"epsilon={e}: {exc}")
    return records


def _usable(records):
    recs = list(records)
    if not recs:
        raise InsufficientData("no records")
    censored = sum(1 for r in recs if r.censored)
    if censored > 0.5 * len(recs):
        raise InsufficientData(f"{censored}/{len(recs)} records censored")
    good = [r for r in recs if not r.censored and r.agreement <= AGREEMENT_CUTOFF]
    if len(good) < 4:
        raise InsufficientData(f"only {len(good)} usable records, need >= 4")
    return good


def _least_squares(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def fit_power(records, spec: ProblemSpec, tolerance: float = None) -> FitResult:
    """log t against log epsilon, judged against the regime's exponent."""
    good = _usable(records)
    law = predicted_law(spec)
    if law.exponent is None:
        raise PreconditionViolation(f"no power law is predicted in the {law.regime} regime")
    x = np.log([r.epsilon for r in good])
    y = np.log([r.t_observed for r in good])
    slope, intercept, r2 = _least_squares(x, y)
    tol = SLOPE_TOLERANCE * abs(law.exponent) if tolerance is None else tolerance
    verdict = "consistent" if abs(slope - law.exponent) <= tol else "inconsistent"
    return FitResult(
        model="power_law",
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        predicted_slope=law.exponent,
        verdict=verdict,
        tolerance=tol,
    )


def fit_exponential(records, spec: ProblemSpec) -> FitResult:
    """log t against epsilon^(1-p); the verdict compares this model's fit
    quality against the competing power law on the same records."""
    law = predicted_law(spec)
    if law.regime != "critical":
        raise PreconditionViolation(
            f"exponential-rate fit applies at the threshold power only, regime is {law.regime}"
        )
    good = _usable(records)
    eps = np.array([r.epsilon for r in good])
    y = np.log([r.t_observed for r in good])
    x = eps ** (1.0 - spec.p)
    slope, intercept, r2 = _least_squares(x, y)
    _, _, r2_power = _least_squares(np.log(eps), y)
    verdict = "consistent" if r2 > r2_power else "inconsistent"
    return FitResult(
        model="exponential_rate",
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        predicted_slope=math.nan,
        verdict=verdict,
        tolerance=math.nan,
        r_squared_alt=r2_power,
    )
