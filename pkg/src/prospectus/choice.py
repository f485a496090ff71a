"""Objective trip utilities, logit choice probabilities, and value of time."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import DomainError
from .prospects import DiscreteProspect
from .types import Mode, TripTimes, UtilityCoefficients

__all__ = [
    "TripOption",
    "trip_utility",
    "srs_two_point_utilities",
    "logit_probabilities",
    "binary_choice_probability",
    "expected_utility",
    "objective_acceptance_probability",
    "value_of_time",
]


@dataclass(frozen=True)
class TripOption:
    """One travel alternative: a mode with its times and tariff."""

    mode: Mode
    times: TripTimes
    tariff: float

    def __post_init__(self):
        if not (math.isfinite(self.tariff) and self.tariff >= 0):
            raise DomainError(f"tariff must be finite and non-negative, got {self.tariff}")


def trip_utility(option: TripOption, coeffs: UtilityCoefficients) -> float:
    """Linear trip utility: time weights dotted with times, plus tariff and constant."""
    a = coeffs.time_weights(option.mode)
    t = option.times.as_tuple()
    return float(np.dot(a, t) + coeffs.b * option.tariff + coeffs.c[option.mode])


def srs_two_point_utilities(t_hi: TripTimes, t_lo: TripTimes, tariff: float,
                            coeffs: UtilityCoefficients) -> tuple[float, float]:
    """Utilities of a shared-ride trip with two possible time outcomes.

    The longer time vector t_hi yields the lower utility; returns
    (u_lo, u_hi) with u_lo <= u_hi.
    """
    if not all(hi >= lo for hi, lo in zip(t_hi.as_tuple(), t_lo.as_tuple())):
        raise DomainError("t_hi must dominate t_lo componentwise")
    u_lo = trip_utility(TripOption(Mode.SRS, t_hi, tariff), coeffs)
    u_hi = trip_utility(TripOption(Mode.SRS, t_lo, tariff), coeffs)
    return (u_lo, u_hi)


def logit_probabilities(utilities: Sequence[float]) -> np.ndarray:
    """Multinomial logit choice probabilities (softmax of the utilities).

    Computed with max-subtraction so that large utilities cannot overflow.
    """
    u = np.asarray(utilities, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise DomainError("at least two utilities are required")
    if not np.all(np.isfinite(u)):
        raise DomainError("utilities must be finite")
    e = np.exp(u - u.max())
    return e / e.sum()


def binary_choice_probability(delta_u: float) -> float:
    """Probability of picking the first of two options given the utility gap."""
    if not math.isfinite(delta_u):
        raise DomainError(f"utility difference must be finite, got {delta_u!r}")
    return float(expit(delta_u))


def expected_utility(prospect: DiscreteProspect) -> float:
    """Probability-weighted average of the prospect's outcomes."""
    return prospect.mean()


def objective_acceptance_probability(u1: float, u2: float) -> float:
    """Binary logit acceptance probability of option 1 over option 2."""
    if not (math.isfinite(u1) and math.isfinite(u2)):
        raise DomainError("utilities must be finite")
    return float(expit(u1 - u2))


def value_of_time(a_component: float, b: float) -> float:
    """Willingness to pay for time savings in dollars per hour.

    Both coefficients are per-minute and per-dollar marginal utilities;
    the ratio is scaled by 60 to convert to an hourly figure and comes
    out positive when both are negative.
    """
    if b == 0:
        raise DomainError("tariff coefficient must be nonzero")
    return (a_component / b) * 60.0
