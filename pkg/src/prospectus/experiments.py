"""Computational experiments on risk attitudes in ride-share pricing.

All experiments compare a risky shared ride whose outcomes shift with the
tariff against a certain alternative: the fourfold pattern of risk
attitudes, strong aversion of mixed prospects (including the admissible
tariff window), reference-point comparisons, and monotonicity of the
subjective acceptance probability in the tariff.  Each experiment is a
pure function of its setup; identical setups produce identical series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.optimize import brentq

from . import defaults
from .choice import expected_utility, objective_acceptance_probability
from .cpt import (
    certain_prospect_subjective_value,
    subjective_acceptance_probability,
    subjective_utility_continuous,
    subjective_utility_discrete,
)
from .errors import ConvergenceError, InvalidSetupError
from .prospects import (
    BernoulliTwoPoint,
    ContinuousProspect,
    DiscreteProspect,
    TruncatedNormal,
    TruncatedPoisson,
    UniformProspect,
    _atoms_or_none,
    shift,
)
from .types import CptParams, Reference, resolve_reference

__all__ = [
    "Quadrant",
    "Variant",
    "TariffGrid",
    "ExperimentSetup",
    "ExperimentSeries",
    "MonotonicityReport",
    "fourfold_experiment",
    "lambda_star_search",
    "mixed_prospect_tariff_bounds",
    "mixed_prospect_experiment",
    "self_reference_experiment",
    "verify_monotonicity",
    "default_distributions",
]


class Quadrant(enum.Enum):
    """Gain/loss framing crossed with high/low probability of the non-reference outcome."""

    HP_GAIN = "hp-gain"
    HP_LOSS = "hp-loss"
    LP_GAIN = "lp-gain"
    LP_LOSS = "lp-loss"

    @property
    def is_gain(self) -> bool:
        return self in (Quadrant.HP_GAIN, Quadrant.LP_GAIN)

    @property
    def is_high_probability(self) -> bool:
        return self in (Quadrant.HP_GAIN, Quadrant.HP_LOSS)


class Variant(enum.Enum):
    """Full model versus probability distortion alone (linear value, no loss aversion)."""

    GENERAL = "general"
    DISTORTION_ONLY = "distortion-only"


@dataclass(frozen=True)
class TariffGrid:
    """Half-open tariff grid [lo, hi) with n equally spaced points."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise InvalidSetupError("tariff grid needs finite lo < hi")
        if self.n < 2:
            raise InvalidSetupError(f"tariff grid needs at least 2 points, got {self.n}")

    def values(self) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.arange(self.n) / self.n


@dataclass(frozen=True)
class ExperimentSetup:
    """Shared numeric setup of the experiments.

    x_hi and x_lo are the best and worst shared-ride utility components
    excluding the tariff term; a_certain is the objective utility of the
    certain alternative.  p_nr is the probability level that makes the
    non-reference outcome "high probability".
    """

    x_hi: float = -5.0
    x_lo: float = -9.0
    a_certain: float = -7.0
    b: float = -0.0518
    cpt: CptParams = field(
        default_factory=lambda: defaults.cpt_params(sign_dependent_alpha=False))
    tariff_grid: TariffGrid = field(default_factory=lambda: TariffGrid(0.0, 38.0, 200))
    p_nr: float = 0.95

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise InvalidSetupError("x_lo must be strictly below x_hi")
        if not (math.isfinite(self.b) and self.b < 0):
            raise InvalidSetupError(f"tariff coefficient b must be negative, got {self.b}")
        if not math.isfinite(self.a_certain):
            raise InvalidSetupError("a_certain must be finite")
        if not 0.5 < self.p_nr < 1.0:
            raise InvalidSetupError(f"p_nr must lie in (0.5, 1), got {self.p_nr}")


@dataclass
class ExperimentSeries:
    """Tariff-indexed curves produced by an experiment."""

    gamma: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict[str, object]

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.gamma.shape:
                raise InvalidSetupError(f"column {name!r} does not match the tariff grid")
            self.columns[name] = col

    def column_names(self) -> list[str]:
        return list(self.columns)


def _poisson_rate_for(quadrant: Quadrant, p_nr: float) -> float:
    """Delay rate of the two-outcome prospect realizing the quadrant.

    The probability of the top outcome is 1/(rate + 1); the quadrant fixes
    the probability of whichever outcome is not the reference.
    """
    p_non_reference = p_nr if quadrant.is_high_probability else 1.0 - p_nr
    p_top = p_non_reference if quadrant.is_gain else 1.0 - p_non_reference
    return (1.0 - p_top) / p_top


def fourfold_experiment(setup: ExperimentSetup, quadrant: Quadrant,
                        variant: Variant) -> ExperimentSeries:
    """Relative attractiveness of the risky ride across one quadrant.

    The reference tracks the worst outcome in the gain quadrants and the
    best outcome in the loss quadrants; the tariff grid is restricted so
    that the certain alternative stays in the same gain/loss regime.  The
    emitted RA column is (U_o - A_o) - (U_s - A_s): positive values mean
    the distorted agent is less willing to accept the risky ride than a
    rational one (risk aversion), negative values mean risk seeking.
    """
    rate = _poisson_rate_for(quadrant, setup.p_nr)
    p_lo = rate / (rate + 1.0)
    gamma_all = setup.tariff_grid.values()
    if quadrant.is_gain:
        admissible = setup.x_lo + setup.b * gamma_all < setup.a_certain
        constraint = "x_lo + b*gamma < a_certain"
    else:
        admissible = setup.x_hi + setup.b * gamma_all > setup.a_certain
        constraint = "x_hi + b*gamma > a_certain"
    gamma = gamma_all[admissible]
    if gamma.size == 0:
        raise InvalidSetupError(
            f"no admissible tariff in [{setup.tariff_grid.lo}, {setup.tariff_grid.hi}) "
            f"for quadrant {quadrant.value}: {constraint} never holds")

    params = setup.cpt.with_linear_value() if variant is Variant.DISTORTION_ONLY else setup.cpt
    u_o = np.empty(gamma.size)
    u_s = np.empty(gamma.size)
    a_s = np.empty(gamma.size)
    p_o = np.empty(gamma.size)
    p_s = np.empty(gamma.size)
    for i, g in enumerate(gamma):
        lo, hi = setup.x_lo + setup.b * g, setup.x_hi + setup.b * g
        prospect = DiscreteProspect((lo, hi), (p_lo, 1.0 - p_lo))
        r = lo if quadrant.is_gain else hi
        u_o[i] = expected_utility(prospect)
        subj = subjective_utility_discrete(prospect, r, params)
        cert = certain_prospect_subjective_value(setup.a_certain, r, params)
        u_s[i] = subj.value
        a_s[i] = cert.value
        p_o[i] = objective_acceptance_probability(u_o[i], setup.a_certain)
        p_s[i] = subjective_acceptance_probability(subj, cert)
    ra = (u_o - setup.a_certain) - (u_s - a_s)
    return ExperimentSeries(
        gamma=gamma,
        columns={
            "U_o": u_o, "U_s_R": u_s,
            "A_o": np.full(gamma.size, setup.a_certain), "A_s_R": a_s,
            "RA": ra, "p_o": p_o, "p_s_R": p_s,
        },
        metadata={
            "experiment": "fourfold",
            "quadrant": quadrant.value,
            "variant": variant.value,
            "poisson_rate": rate,
            "p_nr": setup.p_nr,
            "reference": "x_lo + b*gamma" if quadrant.is_gain else "x_hi + b*gamma",
        },
    )


def _subjective_value(prospect: Union[DiscreteProspect, ContinuousProspect],
                      reference: Union[Reference, float], params: CptParams,
                      **kwargs) -> float:
    if isinstance(prospect, DiscreteProspect):
        return subjective_utility_discrete(prospect, reference, params, **kwargs).value
    return subjective_utility_continuous(prospect, reference, params, **kwargs).value


def _prospect_mean(prospect: Union[DiscreteProspect, ContinuousProspect]) -> float:
    return prospect.mean()


def _is_degenerate(prospect: Union[DiscreteProspect, ContinuousProspect]) -> bool:
    if isinstance(prospect, DiscreteProspect):
        return prospect.n < 2
    atoms = _atoms_or_none(prospect)
    if atoms is not None:
        return atoms.n < 2
    return False


def lambda_star_search(prospect: Union[DiscreteProspect, ContinuousProspect],
                       cpt_base: CptParams,
                       lambda_range: tuple[float, float] = (1e-3, 1e4),
                       tol: float = 1e-9) -> float:
    """Loss-aversion threshold above which the self-referenced utility is negative.

    With the reference at the prospect's own expectation, the subjective
    utility decreases strictly in the loss-aversion coefficient; bisection
    locates the sign change.  Returns lambda_star such that the utility is
    negative for every larger coefficient (within the bracket tolerance).
    """
    if _is_degenerate(prospect):
        raise InvalidSetupError(
            "prospect must be genuinely uncertain; a single-outcome prospect "
            "has identically zero self-referenced utility")
    lo, hi = lambda_range
    if not (0 < lo < hi):
        raise InvalidSetupError(f"invalid lambda_range {lambda_range}")
    mean = _prospect_mean(prospect)

    def utility_at(lam: float) -> float:
        return _subjective_value(prospect, mean, replace(cpt_base, loss_aversion=lam))

    f_lo, f_hi = utility_at(lo), utility_at(hi)
    if f_lo < 0:
        raise ConvergenceError(
            f"subjective utility already negative at lambda={lo}; widen lambda_range")
    if f_hi >= 0:
        raise ConvergenceError(
            f"no sign change on [{lo}, {hi}]: utility({hi})={f_hi:.3e} >= 0")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if utility_at(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mixed_prospect_tariff_bounds(setup: ExperimentSetup,
                                 distribution: ContinuousProspect) -> tuple[float, float]:
    """Tariff window on which the distorted agent under-accepts the risky ride.

    The lower bound makes the certain alternative exactly break even with
    the prospect's expectation; the upper bound solves
    ``d^beta_gain - U_s = d`` for the expectation shortfall d, and is
    infinite when beta_gain is 1.  Requires the self-referenced subjective
    utility to be negative (sufficient loss aversion).
    """
    x_mean = distribution.mean()
    gamma_lower = (setup.a_certain - x_mean) / setup.b + 0.0
    u_s = _subjective_value(shift(distribution, setup.b * gamma_lower),
                            x_mean + setup.b * gamma_lower, setup.cpt)
    if u_s >= 0:
        raise InvalidSetupError(
            f"self-referenced subjective utility is {u_s:.6g} >= 0; "
            "a negative value (sufficient loss aversion) is required")
    if setup.cpt.beta_gain == 1.0:
        return (gamma_lower, math.inf)

    def gap(d: float) -> float:
        return d ** setup.cpt.beta_gain - u_s - d

    d_hi = 1.0
    while gap(d_hi) > 0:
        d_hi *= 2.0
        if d_hi > 1e12:
            raise ConvergenceError(
                f"no sign change while bracketing the upper tariff: gap({d_hi:.3e})="
                f"{gap(d_hi):.3e} at bracket [0, {d_hi:.3e}]")
    d_star = brentq(gap, 0.0, d_hi, xtol=1e-12, rtol=8.9e-16)
    return (gamma_lower, gamma_lower - d_star / setup.b)


def mixed_prospect_experiment(setup: ExperimentSetup,
                              distribution: ContinuousProspect,
                              grid: TariffGrid | None = None) -> ExperimentSeries:
    """Objective versus self-referenced acceptance curves of a mixed prospect.

    The reference is the prospect's own expectation, recomputed at every
    tariff since the outcomes shift with it.  With no explicit grid, 50
    points cover the admissible window (capped when the upper bound is
    infinite).
    """
    gamma_lower, gamma_upper = mixed_prospect_tariff_bounds(setup, distribution)
    if grid is None:
        hi = gamma_upper if math.isfinite(gamma_upper) else gamma_lower + 200.0
        grid = TariffGrid(gamma_lower, hi, 50)
    if grid.lo < gamma_lower - 1e-12:
        raise InvalidSetupError(
            f"tariff grid must start at or above gamma_lower={gamma_lower:.6g}")
    gamma = grid.values()
    p_o = np.empty(gamma.size)
    p_s = np.empty(gamma.size)
    u_bar = np.empty(gamma.size)
    u_s = np.empty(gamma.size)
    a_s = np.empty(gamma.size)
    for i, g in enumerate(gamma):
        prospect = shift(distribution, setup.b * g)
        mean = prospect.mean()
        u_bar[i] = mean
        subj = subjective_utility_continuous(prospect, mean, setup.cpt)
        cert = certain_prospect_subjective_value(setup.a_certain, mean, setup.cpt)
        u_s[i] = subj.value
        a_s[i] = cert.value
        p_o[i] = objective_acceptance_probability(mean, setup.a_certain)
        p_s[i] = subjective_acceptance_probability(subj, cert)
    return ExperimentSeries(
        gamma=gamma,
        columns={"U_o": u_bar, "U_s_R": u_s,
                 "A_o": np.full(gamma.size, setup.a_certain), "A_s_R": a_s,
                 "p_o": p_o, "p_s_R": p_s},
        metadata={"experiment": "mixed",
                  "distribution": type(distribution).__name__,
                  "reference": "prospect expectation",
                  "gamma_lower": gamma_lower,
                  "gamma_upper": gamma_upper},
    )


def default_distributions(setup: ExperimentSetup) -> dict[str, ContinuousProspect]:
    """The four outcome distributions used by the reference-point comparison.

    All are parameterized over [x_lo, x_hi]: an even two-point prospect, a
    truncated Poisson delay count (rate 4, five delays), a truncated
    normal centred on the interval, and a uniform.
    """
    mid = 0.5 * (setup.x_lo + setup.x_hi)
    sigma = (setup.x_hi - setup.x_lo) / 6.0
    return {
        "bernoulli": BernoulliTwoPoint(setup.x_lo, setup.x_hi, 0.5),
        "truncated_poisson": TruncatedPoisson(4.0, 5, setup.x_hi, setup.x_lo),
        "normal": TruncatedNormal(mid, sigma, setup.x_lo, setup.x_hi),
        "uniform": UniformProspect(setup.x_lo, setup.x_hi),
    }


def self_reference_experiment(setup: ExperimentSetup,
                              distributions: dict[str, ContinuousProspect] | None = None,
                              grid: TariffGrid | None = None) -> list[ExperimentSeries]:
    """Acceptance probability with the prospect's expectation versus the
    alternative's utility as the reference point.

    For each distribution the two curves are emitted over the tariff grid,
    and both are also evaluated at the coincidence tariff (where the
    expectation equals the certain utility and the two references agree);
    those probe values are stored in the metadata.

    The self-referenced curve dominates only where loss aversion outweighs
    diminishing sensitivity.  Immediately above the coincidence tariff the
    certain alternative is a small gain whose subjective value rises with
    an unbounded slope when beta_gain < 1, which flips the comparison by a
    hair (order 1e-4 in probability at the bundled estimates, invisible at
    plotting resolution).  The default grid therefore starts above that
    band; pass an explicit grid to probe it.
    """
    if distributions is None:
        distributions = default_distributions(setup)
    if grid is None:
        grid = TariffGrid(12.0, 48.0, 100)
    gamma = grid.values()
    series = []
    for name, dist in distributions.items():
        x_mean = dist.mean()
        gamma_star = (setup.a_certain - x_mean) / setup.b + 0.0
        p_self = np.empty(gamma.size)
        p_alt = np.empty(gamma.size)

        def eval_pair(g: float) -> tuple[float, float]:
            prospect = shift(dist, setup.b * g)
            mean = prospect.mean()
            subj_self = subjective_utility_continuous(prospect, mean, setup.cpt)
            cert_self = certain_prospect_subjective_value(setup.a_certain, mean, setup.cpt)
            subj_alt = subjective_utility_continuous(prospect, setup.a_certain, setup.cpt)
            cert_alt = certain_prospect_subjective_value(
                setup.a_certain, setup.a_certain, setup.cpt)
            return (subjective_acceptance_probability(subj_self, cert_self),
                    subjective_acceptance_probability(subj_alt, cert_alt))

        for i, g in enumerate(gamma):
            p_self[i], p_alt[i] = eval_pair(g)
        p_self_star, p_alt_star = eval_pair(gamma_star)
        series.append(ExperimentSeries(
            gamma=gamma,
            columns={"p_s_ref_mean": p_self, "p_s_ref_alternative": p_alt},
            metadata={"experiment": "self-reference",
                      "distribution": name,
                      "gamma_star": gamma_star,
                      "p_self_at_star": p_self_star,
                      "p_alt_at_star": p_alt_star},
        ))
    return series


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of the strict-decrease check of the acceptance probability."""

    strictly_decreasing: bool
    first_violation_gamma: float | None
    gamma: np.ndarray
    p_s_R: np.ndarray


def verify_monotonicity(setup: ExperimentSetup,
                        reference: Union[Reference, float],
                        grid: TariffGrid | None = None,
                        p_lo: float = 0.5) -> MonotonicityReport:
    """Check that the subjective acceptance probability strictly falls with the tariff.

    Uses a two-point risky ride against the certain alternative.  Both a
    static reference and a tariff-linked one are supported; violations are
    reported, not raised.
    """
    grid = grid or setup.tariff_grid
    gamma = grid.values()
    p_s = np.empty(gamma.size)
    for i, g in enumerate(gamma):
        prospect = DiscreteProspect.from_outcomes(
            [setup.x_lo + setup.b * g, setup.x_hi + setup.b * g], [p_lo, 1.0 - p_lo])
        r = resolve_reference(reference, tariff=g, tariff_coefficient=setup.b)
        subj = subjective_utility_discrete(prospect, r, setup.cpt)
        cert = certain_prospect_subjective_value(setup.a_certain, r, setup.cpt)
        p_s[i] = subjective_acceptance_probability(subj, cert)
    diffs = np.diff(p_s)
    bad = np.nonzero(diffs >= 0)[0]
    return MonotonicityReport(
        strictly_decreasing=bad.size == 0,
        first_violation_gamma=float(gamma[bad[0] + 1]) if bad.size else None,
        gamma=gamma,
        p_s_R=p_s,
    )
