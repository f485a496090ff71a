"""Outcome distributions over utilities.

Four families cover everything the models need: a two-point Bernoulli
prospect, a truncated Poisson delay distribution mapped onto a utility
interval, a truncated normal, and a uniform.  The first two are purely
atomic; the latter two are absolutely continuous with bounded support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, InvalidProspectError

__all__ = [
    "DiscreteProspect",
    "BernoulliTwoPoint",
    "TruncatedPoisson",
    "TruncatedNormal",
    "UniformProspect",
    "ContinuousProspect",
    "bernoulli_cdf",
    "truncated_poisson_pmf",
    "discretize",
    "shift",
]

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteProspect:
    """A finite prospect: strictly ascending utilities with probabilities.

    The constructor is strict: it rejects unsorted or duplicated outcomes
    and probability vectors that do not sum to one.  Use ``from_outcomes``
    to build a prospect from raw data (it sorts, merges equal outcomes and
    drops zero-probability ones before validating).
    """

    utilities: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        us = np.asarray(self.utilities, dtype=float)
        ps = np.asarray(self.probabilities, dtype=float)
        if us.ndim != 1 or ps.ndim != 1 or us.size != ps.size or us.size == 0:
            raise InvalidProspectError("utilities and probabilities must be equal-length, non-empty")
        if not (np.all(np.isfinite(us)) and np.all(np.isfinite(ps))):
            raise InvalidProspectError("outcomes and probabilities must be finite")
        if us.size > 1 and not np.all(np.diff(us) > 0):
            raise InvalidProspectError("utilities must be strictly ascending without duplicates")
        if np.any(ps <= 0) or np.any(ps > 1):
            raise InvalidProspectError("probabilities must lie in (0, 1]")
        total = float(ps.sum())
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise InvalidProspectError(f"probabilities must sum to 1, got {total!r}")
        object.__setattr__(self, "utilities", tuple(us.tolist()))
        object.__setattr__(self, "probabilities", tuple(ps.tolist()))

    @classmethod
    def from_outcomes(cls, utilities: Sequence[float],
                      probabilities: Sequence[float]) -> "DiscreteProspect":
        """Build a prospect from raw outcome data.

        Outcomes are sorted ascending; equal utilities are merged with
        their probabilities summed (expectations and the CDF are
        preserved) and zero-probability outcomes are dropped.
        """
        us = np.asarray(utilities, dtype=float)
        ps = np.asarray(probabilities, dtype=float)
        if us.shape != ps.shape or us.ndim != 1:
            raise InvalidProspectError("utilities and probabilities must be equal-length 1-d")
        if np.any(ps < 0):
            raise InvalidProspectError("probabilities must be non-negative")
        order = np.argsort(us, kind="stable")
        us, ps = us[order], ps[order]
        keep_first = np.ones(us.size, dtype=bool)
        keep_first[1:] = np.diff(us) > 0
        groups = np.cumsum(keep_first) - 1
        merged_p = np.zeros(int(groups[-1]) + 1 if us.size else 0)
        np.add.at(merged_p, groups, ps)
        merged_u = us[keep_first]
        nonzero = merged_p > 0
        return cls(tuple(merged_u[nonzero].tolist()), tuple(merged_p[nonzero].tolist()))

    @property
    def n(self) -> int:
        return len(self.utilities)

    def utility_array(self) -> np.ndarray:
        return np.asarray(self.utilities, dtype=float)

    def probability_array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)

    def cumulative(self) -> np.ndarray:
        """CDF values F(u_i) at each outcome.

        The last value is pinned to exactly 1: the probabilities are
        validated to sum to one, and an ulp of cumsum rounding below 1
        would be blown up by steep probability distortions there.
        """
        out = np.minimum(np.cumsum(self.probability_array()), 1.0)
        out[-1] = 1.0
        return out

    def cdf(self, u: float) -> float:
        _check_query(u)
        idx = np.searchsorted(self.utility_array(), u, side="right")
        return 0.0 if idx == 0 else float(self.cumulative()[idx - 1])

    def mean(self) -> float:
        return float(np.dot(self.utility_array(), self.probability_array()))

    def support(self) -> tuple[float, float]:
        return (self.utilities[0], self.utilities[-1])


def _check_query(u: float) -> None:
    if not math.isfinite(u):
        raise DomainError(f"query point must be finite, got {u!r}")


@dataclass(frozen=True)
class BernoulliTwoPoint:
    """Two-outcome prospect: the low utility occurs with probability p_lo."""

    u_lo: float
    u_hi: float
    p_lo: float

    def __post_init__(self):
        if not (math.isfinite(self.u_lo) and math.isfinite(self.u_hi)):
            raise InvalidProspectError("outcomes must be finite")
        if self.u_lo > self.u_hi:
            raise InvalidProspectError("u_lo must not exceed u_hi")
        if not 0.0 <= self.p_lo <= 1.0:
            raise InvalidProspectError(f"p_lo must lie in [0, 1], got {self.p_lo}")

    def support(self) -> tuple[float, float]:
        return (self.u_lo, self.u_hi)

    def cdf(self, u: float) -> float:
        return bernoulli_cdf(self, u)

    def mean(self) -> float:
        return self.p_lo * self.u_lo + (1.0 - self.p_lo) * self.u_hi

    def atoms(self) -> DiscreteProspect:
        return DiscreteProspect.from_outcomes(
            [self.u_lo, self.u_hi], [self.p_lo, 1.0 - self.p_lo]
        )


def bernoulli_cdf(prospect: BernoulliTwoPoint, u: float) -> float:
    """Step CDF of a two-point prospect: 0 below u_lo, p_lo before u_hi, then 1."""
    _check_query(u)
    if u < prospect.u_lo:
        return 0.0
    if u < prospect.u_hi:
        return prospect.p_lo
    return 1.0


@dataclass(frozen=True)
class TruncatedPoisson:
    """Poisson-distributed delay count mapped onto a utility interval.

    A count k in {0, ..., max_delays} lands on
    ``x_hi - k * (x_hi - x_lo) / max_delays + tariff_term``; probabilities
    are the Poisson masses renormalized over the truncated range.
    """

    rate: float
    max_delays: int
    x_hi: float
    x_lo: float
    tariff_term: float = 0.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise InvalidProspectError(f"rate must be positive, got {self.rate}")
        if int(self.max_delays) != self.max_delays or self.max_delays < 1:
            raise InvalidProspectError(f"max_delays must be an integer >= 1, got {self.max_delays}")
        if not (self.x_lo < self.x_hi):
            raise InvalidProspectError("x_lo must be strictly below x_hi")
        if not math.isfinite(self.tariff_term):
            raise InvalidProspectError("tariff_term must be finite")
        object.__setattr__(self, "max_delays", int(self.max_delays))

    def atoms(self) -> DiscreteProspect:
        base = truncated_poisson_pmf(self.rate, self.max_delays, self.x_hi, self.x_lo)
        return DiscreteProspect.from_outcomes(
            base.utility_array() + self.tariff_term, base.probability_array()
        )

    def support(self) -> tuple[float, float]:
        return (self.x_lo + self.tariff_term, self.x_hi + self.tariff_term)

    def cdf(self, u: float) -> float:
        return self.atoms().cdf(u)

    def mean(self) -> float:
        return self.atoms().mean()


def truncated_poisson_pmf(rate: float, max_delays: int,
                          x_hi: float, x_lo: float) -> DiscreteProspect:
    """Outcome distribution of a Poisson delay count truncated at max_delays.

    Mass ``rate^k e^-rate / k!`` (renormalized over k = 0..max_delays) is
    placed at ``x_hi - k * (x_hi - x_lo) / max_delays``, so k = 0 maps to
    the best outcome and k = max_delays to the worst.
    """
    if max_delays < 1:
        raise InvalidProspectError(f"max_delays must be >= 1, got {max_delays}")
    if not x_lo < x_hi:
        raise InvalidProspectError("x_lo must be strictly below x_hi")
    if not rate > 0:
        raise InvalidProspectError(f"rate must be positive, got {rate}")
    k = np.arange(max_delays + 1)
    log_mass = k * math.log(rate) - rate - np.array([math.lgamma(i + 1) for i in k])
    mass = np.exp(log_mass - log_mass.max())
    mass /= mass.sum()
    xs = x_hi - k * (x_hi - x_lo) / max_delays
    return DiscreteProspect.from_outcomes(xs, mass)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal distribution renormalized to the interval [lo, hi].

    Bounds default to mu +/- 6 sigma; integration and discretization need
    the support to be bounded.
    """

    mu: float
    sigma: float
    lo: float = math.nan
    hi: float = math.nan

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma) and math.isfinite(self.mu)):
            raise InvalidProspectError("mu must be finite and sigma positive")
        lo = self.mu - 6.0 * self.sigma if math.isnan(self.lo) else float(self.lo)
        hi = self.mu + 6.0 * self.sigma if math.isnan(self.hi) else float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidProspectError("truncation bounds must be finite with lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "_z_lo", ndtr((lo - self.mu) / self.sigma))
        object.__setattr__(self, "_z_hi", ndtr((hi - self.mu) / self.sigma))

    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        z = ndtr((u - self.mu) / self.sigma)
        out = (z - self._z_lo) / (self._z_hi - self._z_lo)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        z = self._z_lo + q * (self._z_hi - self._z_lo)
        out = self.mu + self.sigma * ndtri(np.clip(z, 1e-320, 1.0 - 1e-16))
        out = np.clip(out, self.lo, self.hi)
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        # Mean of the renormalized truncation: mu + sigma * (phi(a) - phi(b)) / Z.
        a = (self.lo - self.mu) / self.sigma
        b = (self.hi - self.mu) / self.sigma
        phi = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        return self.mu + self.sigma * (phi(a) - phi(b)) / (self._z_hi - self._z_lo)

    def atoms(self) -> None:
        return None


@dataclass(frozen=True)
class UniformProspect:
    """Uniform distribution on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise InvalidProspectError("uniform bounds must be finite with lo < hi")

    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def cdf(self, u):
        u = np.asarray(u, dtype=float)
        out = np.clip((u - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        out = self.lo + q * (self.hi - self.lo)
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def atoms(self) -> None:
        return None


ContinuousProspect = Union[BernoulliTwoPoint, TruncatedPoisson, TruncatedNormal, UniformProspect]


def _atoms_or_none(prospect: ContinuousProspect) -> DiscreteProspect | None:
    getter = getattr(prospect, "atoms", None)
    return getter() if getter is not None else None


def discretize(prospect: ContinuousProspect, n_points: int) -> DiscreteProspect:
    """Approximate a continuous prospect by an n-point discrete one.

    Atomic families are returned exactly.  For the continuous families the
    support is split into n_points equal cells; each cell gets the CDF
    mass of the cell at its midpoint.
    """
    if n_points < 2:
        raise DomainError(f"n_points must be >= 2, got {n_points}")
    atoms = _atoms_or_none(prospect)
    if atoms is not None:
        return atoms
    lo, hi = prospect.support()
    edges = np.linspace(lo, hi, n_points + 1)
    masses = np.diff(prospect.cdf(edges))
    reps = 0.5 * (edges[:-1] + edges[1:])
    total = masses.sum()
    if not math.isfinite(total) or total <= 0:
        raise InvalidProspectError("prospect has no probability mass on its support")
    return DiscreteProspect.from_outcomes(reps, masses / total)


def shift(prospect: ContinuousProspect, delta: float) -> ContinuousProspect:
    """Translate a prospect's outcomes by a constant utility offset."""
    if isinstance(prospect, BernoulliTwoPoint):
        return BernoulliTwoPoint(prospect.u_lo + delta, prospect.u_hi + delta, prospect.p_lo)
    if isinstance(prospect, TruncatedPoisson):
        return TruncatedPoisson(prospect.rate, prospect.max_delays, prospect.x_hi,
                                prospect.x_lo, prospect.tariff_term + delta)
    if isinstance(prospect, TruncatedNormal):
        return TruncatedNormal(prospect.mu + delta, prospect.sigma,
                               prospect.lo + delta, prospect.hi + delta)
    if isinstance(prospect, UniformProspect):
        return UniformProspect(prospect.lo + delta, prospect.hi + delta)
    raise DomainError(f"cannot shift prospect of type {type(prospect).__name__}")
