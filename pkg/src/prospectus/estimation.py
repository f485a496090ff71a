"""Parameter estimation and lottery-based risk-effect detectors.

Three kinds of inference from survey data:

- mode-choice coefficients by maximum simulated likelihood for a
  random-coefficients (mixed) logit, with quasi-random normal draws;
- risk-preference parameters by nonlinear least squares on elicited
  certainty equivalents of two-outcome lotteries;
- nonparametric detectors for reflection, probability weighting and
  loss aversion from simple monetary lottery responses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.special import logsumexp, ndtri
from scipy.stats import qmc

from .choice import TripOption
from .cpt import subjective_utility_discrete
from .errors import (
    DomainError,
    IdentifiabilityError,
    InvalidSetupError,
    SchemaError,
    SeparationError,
)
from .prospects import DiscreteProspect
from .types import CptParams, Mode

__all__ = [
    "PARAMETER_NAMES",
    "ChoiceObservation",
    "CertaintyEquivalentObservation",
    "Frame",
    "LotteryResponse",
    "EstimationResult",
    "fit_mixed_logit_msl",
    "fit_cpt_nls",
    "predicted_certainty_equivalent",
    "ReflectionResult",
    "BandRate",
    "ProbabilityWeightingResult",
    "LossAversionResult",
    "detect_reflection_effect",
    "detect_probability_weighting",
    "loss_aversion_ratio",
]

# Order of the mode-choice coefficient vector used throughout estimation.
PARAMETER_NAMES: tuple[str, ...] = (
    "a_walk", "a_wait", "a_ride_transit", "a_ride_uberx", "a_ride_srs",
    "b", "c_uberx", "c_srs",
)

CPT_PARAMETER_NAMES: tuple[str, ...] = (
    "alpha_gain", "alpha_loss", "beta_gain", "beta_loss", "loss_aversion",
)


@dataclass(frozen=True)
class ChoiceObservation:
    """One stated choice: the offered trip options and the picked index."""

    respondent_id: str
    options: tuple[TripOption, ...]
    chosen: int

    def __post_init__(self):
        if len(self.options) < 2:
            raise DomainError("a choice observation needs at least two options")
        if not 0 <= self.chosen < len(self.options):
            raise DomainError(
                f"chosen index {self.chosen} out of range for {len(self.options)} options")
        object.__setattr__(self, "options", tuple(self.options))


@dataclass(frozen=True)
class CertaintyEquivalentObservation:
    """A two-outcome lottery and the certain amount judged equivalent to it.

    Utilities are relative to the status quo (reference zero); ``p_lo`` is
    the probability of the worse outcome.  ``offered`` optionally records
    the ladder of certain alternatives shown to the respondent.
    """

    u_lo: float
    u_hi: float
    p_lo: float
    ce: float
    offered: tuple[float, ...] = ()

    def __post_init__(self):
        if not (math.isfinite(self.u_lo) and math.isfinite(self.u_hi)
                and self.u_lo < self.u_hi):
            raise DomainError("u_lo must be finite and strictly below u_hi")
        if not 0.0 < self.p_lo < 1.0:
            raise DomainError(f"p_lo must lie in (0, 1), got {self.p_lo}")
        if not self.u_lo <= self.ce <= self.u_hi:
            raise DomainError(
                f"certainty equivalent {self.ce} outside the outcome range "
                f"[{self.u_lo}, {self.u_hi}]")
        object.__setattr__(self, "offered", tuple(self.offered))

    def prospect(self) -> DiscreteProspect:
        return DiscreteProspect((self.u_lo, self.u_hi), (self.p_lo, 1.0 - self.p_lo))


class Frame(enum.Enum):
    """Outcome framing of a monetary lottery question."""

    GAIN = "gain"
    LOSS = "loss"
    MIXED = "mixed"


@dataclass(frozen=True)
class LotteryResponse:
    """One lottery question and the respondent's answer.

    Gain frame: win ``gain`` with probability p, else nothing; the
    response is the elicited certainty equivalent.  Loss frame: lose
    ``loss`` with probability p, else nothing; response is the (negative)
    certainty equivalent.  Mixed frame: a 50/50 gamble losing ``loss``;
    the response is the smallest gain that makes the gamble acceptable.
    """

    respondent_id: str
    lottery_id: str
    frame: Frame
    p: float
    gain: float
    loss: float
    response: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"lottery probability must lie in (0, 1), got {self.p}")
        for name in ("gain", "loss", "response"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.gain < 0 or self.loss < 0:
            raise DomainError("gain and loss are magnitudes and must be non-negative")
        if self.frame is Frame.GAIN and not (self.gain > 0 and self.loss == 0):
            raise DomainError("gain-frame lotteries need gain > 0 and loss == 0")
        if self.frame is Frame.LOSS and not (self.loss > 0 and self.gain == 0):
            raise DomainError("loss-frame lotteries need loss > 0 and gain == 0")
        if self.frame is Frame.MIXED and self.gain != 0:
            raise DomainError("mixed-frame lotteries carry the answer in response; gain must be 0")


@dataclass
class EstimationResult:
    """Fitted parameters with uncertainty and convergence diagnostics."""

    means: dict[str, float]
    sds: dict[str, float]
    se_means: dict[str, float] | None
    se_sds: dict[str, float] | None
    objective: float
    objective_name: str
    converged: bool
    seed: int | None
    n_observations: int
    diagnostics: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for ses in (self.se_means, self.se_sds):
            if ses is not None and any(v < 0 for v in ses.values()):
                raise InvalidSetupError("standard errors cannot be negative")


# ---------------------------------------------------------------------------
# Mixed logit by maximum simulated likelihood
# ---------------------------------------------------------------------------

_MODE_FEATURES = {Mode.TRANSIT: 2, Mode.UBERX: 3, Mode.SRS: 4}
_MODE_CONSTANTS = {Mode.UBERX: 6, Mode.SRS: 7}


def _design_row(option: TripOption) -> np.ndarray:
    x = np.zeros(len(PARAMETER_NAMES))
    x[0] = option.times.walk
    x[1] = option.times.wait
    x[_MODE_FEATURES[option.mode]] = option.times.ride
    x[5] = option.tariff
    const = _MODE_CONSTANTS.get(option.mode)
    if const is not None:
        x[const] = 1.0
    return x


@dataclass
class _ChoiceArrays:
    """Rectangular panel layout: respondents x situations x alternatives.

    Respondents with fewer situations are padded with dummy observations
    offering a single zero-feature alternative, which contribute exactly
    zero to both the log-likelihood and its gradient.
    """

    X: np.ndarray        # (R, T, A, F)
    avail: np.ndarray    # (R, T, A) bool
    chosen: np.ndarray   # (R, T)
    n_respondents: int


def _prepare_choice_data(observations: Sequence[ChoiceObservation]) -> _ChoiceArrays:
    by_resp: dict[str, list[ChoiceObservation]] = {}
    for o in observations:
        by_resp.setdefault(str(o.respondent_id), []).append(o)
    ids = sorted(by_resp)
    n_resp = len(ids)
    t_max = max(len(v) for v in by_resp.values())
    a_max = max(len(o.options) for o in observations)
    n_feat = len(PARAMETER_NAMES)
    X = np.zeros((n_resp, t_max, a_max, n_feat))
    avail = np.zeros((n_resp, t_max, a_max), dtype=bool)
    chosen = np.zeros((n_resp, t_max), dtype=np.int64)
    avail[:, :, 0] = True  # padded situations keep one dummy alternative
    for r, rid in enumerate(ids):
        for t, o in enumerate(by_resp[rid]):
            avail[r, t] = False
            for a, option in enumerate(o.options):
                X[r, t, a] = _design_row(option)
                avail[r, t, a] = True
            chosen[r, t] = o.chosen
    return _ChoiceArrays(X, avail, chosen, n_resp)


def _check_separation(observations: Sequence[ChoiceObservation]) -> None:
    offered: dict[Mode, int] = {m: 0 for m in Mode}
    picked: dict[Mode, int] = {m: 0 for m in Mode}
    for o in observations:
        for a, option in enumerate(o.options):
            offered[option.mode] += 1
            if a == o.chosen:
                picked[option.mode] += 1
    for mode in Mode:
        if offered[mode] == 0:
            continue
        if picked[mode] == 0:
            raise SeparationError(
                f"mode {mode.value!r} is never chosen; its coefficients are not identified")
        if picked[mode] == offered[mode]:
            raise SeparationError(
                f"mode {mode.value!r} is chosen whenever offered; perfect prediction")


def _normal_draws(n_respondents: int, n_draws: int, dim: int, seed: int) -> np.ndarray:
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    u = sampler.random(n_respondents * n_draws)
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    return ndtri(u).reshape(n_respondents, n_draws, dim)


def _msl_loglik_and_grad(theta: np.ndarray, data: _ChoiceArrays, draws: np.ndarray,
                         rand_idx: np.ndarray, chunk: int) -> tuple[float, np.ndarray]:
    n_resp, t_max, a_max, n_feat = data.X.shape
    n_rand = rand_idx.size
    mu, sigma = theta[:n_feat], theta[n_feat:]
    n_draws = draws.shape[1] if n_rand else 1

    x_flat = np.ascontiguousarray(data.X.reshape(n_resp, t_max * a_max, n_feat))
    x_chosen = np.take_along_axis(
        data.X, data.chosen[:, :, None, None], axis=2)[:, :, 0, :]   # (R, T, F)
    unavail = ~data.avail[:, :, :, None]                             # (R, T, A, 1)

    loglik_rd = np.empty((n_resp, n_draws))
    score_sum = np.empty((n_resp, n_draws, n_feat))   # scores summed over situations

    for start in range(0, n_draws, chunk):
        sl = slice(start, min(start + chunk, n_draws))
        d_c = sl.stop - sl.start
        if n_rand:
            beta = np.broadcast_to(mu, (n_resp, d_c, n_feat)).copy()  # (R, Dc, F)
            beta[:, :, rand_idx] += sigma * draws[:, sl, :]
        else:
            beta = np.broadcast_to(mu, (n_resp, d_c, n_feat))
        # Utilities for every situation/alternative/draw, through batched matmul.
        util = (x_flat @ beta.transpose(0, 2, 1)).reshape(n_resp, t_max, a_max, d_c)
        util = np.where(unavail, -np.inf, util)
        u_max = util.max(axis=2, keepdims=True)
        e = np.exp(util - u_max)  # unavailable alternatives underflow to exactly 0
        denom = e.sum(axis=2, keepdims=True)
        prob = e / denom                                             # (R, T, A, Dc)
        logp_chosen = np.take_along_axis(
            util - (np.log(denom) + u_max), data.chosen[:, :, None, None], axis=2)
        loglik_rd[:, sl] = logp_chosen[:, :, 0, :].sum(axis=1)
        # Logit score per situation: x_chosen - sum_a p_a x_a; summed over situations.
        mean_x = np.matmul(prob.transpose(0, 1, 3, 2), data.X)       # (R, T, Dc, F)
        score_sum[:, sl, :] = (x_chosen[:, :, None, :] - mean_x).sum(axis=1)

    log_p_r = logsumexp(loglik_rd, axis=1) - math.log(n_draws)
    total = float(log_p_r.sum())
    omega = np.exp(loglik_rd - log_p_r[:, None] - math.log(n_draws))  # (R, D)

    grad = np.empty_like(theta)
    grad[:n_feat] = score_sum.reshape(-1, n_feat).T @ omega.reshape(-1)
    if n_rand:
        weighted = score_sum[:, :, rand_idx] * draws
        grad[n_feat:] = weighted.reshape(-1, n_rand).T @ omega.reshape(-1)
    return total, grad


def fit_mixed_logit_msl(observations: Sequence[ChoiceObservation],
                        random_coefficients: Sequence[str] = PARAMETER_NAMES,
                        n_draws: int = 500,
                        seed: int = 0,
                        max_iter: int = 1000,
                        draw_chunk: int = 64) -> EstimationResult:
    """Fit the mode-choice logit with normally distributed random coefficients.

    The simulated probability of a respondent's choices is the average
    over quasi-random (Halton) normal draws of the product of logit
    probabilities; the simulated log-likelihood is maximized by L-BFGS-B
    with an analytic gradient.  With no random coefficients this is plain
    multinomial-logit maximum likelihood.  Standard errors come from the
    inverse numerical Hessian; a singular Hessian is reported as
    non-convergence rather than papered over.

    Deterministic for a fixed seed: the draws, the optimizer path and the
    result are all reproducible.
    """
    unknown = [n for n in random_coefficients if n not in PARAMETER_NAMES]
    if unknown:
        raise InvalidSetupError(f"unknown coefficient names: {unknown}")
    rand_names = [n for n in PARAMETER_NAMES if n in set(random_coefficients)]
    rand_idx = np.asarray([PARAMETER_NAMES.index(n) for n in rand_names], dtype=np.int64)
    n_feat = len(PARAMETER_NAMES)
    n_params = n_feat + len(rand_names)
    if len(observations) < n_params:
        raise InvalidSetupError(
            f"{n_params} parameters but only {len(observations)} observations")
    if rand_names and n_draws < 100:
        raise InvalidSetupError(f"n_draws must be at least 100, got {n_draws}")
    _check_separation(observations)
    data = _prepare_choice_data(observations)

    if rand_names:
        draws = _normal_draws(data.n_respondents, n_draws, len(rand_names), seed)
    else:
        draws = np.zeros((data.n_respondents, 1, 0))

    trace: list[float] = []
    cache: dict[bytes, float] = {}

    def negative(theta: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = _msl_loglik_and_grad(theta, data, draws, rand_idx, draw_chunk)
        cache[theta.tobytes()] = -value
        return -value, -grad

    def record(theta: np.ndarray) -> None:
        key = theta.tobytes()
        if key in cache:
            trace.append(cache[key])

    # Stage 1: fixed-coefficient logit for starting values.
    mnl_data_draws = np.zeros((data.n_respondents, 1, 0))

    def negative_mnl(theta: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = _msl_loglik_and_grad(theta, data, mnl_data_draws,
                                           np.zeros(0, dtype=np.int64), draw_chunk)
        return -value, -grad

    mnl = minimize(negative_mnl, np.zeros(n_feat), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": 1e-12, "gtol": 1e-7})
    theta0 = np.concatenate([mnl.x, 0.25 * np.abs(mnl.x[rand_idx]) + 0.05])
    bounds = [(None, None)] * n_feat + [(0.0, None)] * len(rand_names)

    result = minimize(negative, theta0, jac=True, method="L-BFGS-B", bounds=bounds,
                      callback=record,
                      options={"maxiter": max_iter, "ftol": 1e-11, "gtol": 1e-5})

    hessian = _numerical_hessian(
        lambda t: _msl_loglik_and_grad(t, data, draws, rand_idx, draw_chunk)[1],
        result.x)
    ses, singular = _se_from_hessian(-hessian)

    means = {n: float(v) for n, v in zip(PARAMETER_NAMES, result.x[:n_feat])}
    sds = {n: float(v) for n, v in zip(rand_names, result.x[n_feat:])}
    se_means = se_sds = None
    if ses is not None:
        se_means = {n: float(s) for n, s in zip(PARAMETER_NAMES, ses[:n_feat])}
        se_sds = {n: float(s) for n, s in zip(rand_names, ses[n_feat:])}
    return EstimationResult(
        means=means,
        sds=sds,
        se_means=se_means,
        se_sds=se_sds,
        objective=-float(result.fun),
        objective_name="log_likelihood",
        converged=bool(result.success) and not singular,
        seed=seed,
        n_observations=len(observations),
        diagnostics={
            "n_respondents": data.n_respondents,
            "n_draws": n_draws if rand_names else 0,
            "optimizer_message": str(result.message),
            "objective_trace": trace,
            "singular_hessian": singular,
        },
    )


def _numerical_hessian(gradient, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    n = x.size
    H = np.zeros((n, n))
    for i in range(n):
        h = step * max(1.0, abs(x[i]))
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        H[i] = (gradient(up) - gradient(down)) / (2.0 * h)
    return 0.5 * (H + H.T)


def _se_from_hessian(neg_hessian: np.ndarray) -> tuple[np.ndarray | None, bool]:
    """Standard errors from the negative-log-likelihood Hessian, or None if singular."""
    try:
        cov = np.linalg.inv(neg_hessian)
    except np.linalg.LinAlgError:
        return None, True
    diag = np.diag(cov)
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0):
        return None, True
    return np.sqrt(diag), False


# ---------------------------------------------------------------------------
# Risk parameters by certainty-equivalent least squares
# ---------------------------------------------------------------------------


def _invert_value(u_s: float, params: CptParams) -> float:
    if u_s >= 0:
        return u_s ** (1.0 / params.beta_gain)
    return -((-u_s / params.loss_aversion) ** (1.0 / params.beta_loss))


def predicted_certainty_equivalent(obs: CertaintyEquivalentObservation,
                                   params: CptParams) -> float:
    """Certain amount a decision maker with the given parameters would accept.

    The subjective utility of the two-outcome lottery (reference zero) is
    inverted through the value function in closed form.
    """
    u_s = subjective_utility_discrete(obs.prospect(), 0.0, params).value
    return _invert_value(u_s, params)


_CPT_DEFAULT_BOUNDS: tuple[tuple[float, float], ...] = (
    (1e-3, 1.0), (1e-3, 1.0), (1e-3, 1.0), (1e-3, 1.0), (1e-2, 100.0),
)


def fit_cpt_nls(observations: Sequence[CertaintyEquivalentObservation],
                init: CptParams,
                bounds: Sequence[tuple[float, float]] = _CPT_DEFAULT_BOUNDS,
                n_starts: int = 8,
                seed: int = 0) -> EstimationResult:
    """Fit risk-preference parameters to elicited certainty equivalents.

    Minimizes the sum of squared differences between observed and
    predicted certainty equivalents with a bounded trust-region
    least-squares solver.  The surface is multi-modal, so the provided
    starting point is augmented with quasi-random restarts inside the
    bounds (loss aversion sampled on a log scale); the best basin wins.
    Deterministic given the starting point and seed.
    """
    if len(observations) < 5:
        raise InvalidSetupError("at least five observations are required")
    has_loss = any(o.u_lo < 0 for o in observations)
    has_gain = any(o.u_hi > 0 for o in observations)
    if not has_loss:
        raise IdentifiabilityError(
            "no observation has a loss outcome: loss_aversion, alpha_loss and "
            "beta_loss are not identified")
    if not has_gain:
        raise IdentifiabilityError(
            "no observation has a gain outcome: alpha_gain and beta_gain are "
            "not identified")
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(bounds) != 5:
        raise InvalidSetupError("bounds must cover the five risk parameters")

    ces = np.asarray([o.ce for o in observations])
    prospects = [o.prospect() for o in observations]

    def residuals(vec: np.ndarray) -> np.ndarray:
        params = CptParams(*vec)
        predicted = np.asarray([
            _invert_value(subjective_utility_discrete(p, 0.0, params).value, params)
            for p in prospects])
        return ces - predicted

    x_init = np.asarray([init.alpha_gain, init.alpha_loss, init.beta_gain,
                         init.beta_loss, init.loss_aversion])
    x_init = np.clip(x_init, [b[0] for b in bounds], [b[1] for b in bounds])
    rng = np.random.default_rng(seed)
    starts = [x_init]
    for _ in range(max(0, n_starts - 1)):
        point = np.empty(5)
        for j, (lo, hi) in enumerate(bounds):
            if j == 4:
                point[j] = math.exp(rng.uniform(math.log(lo), math.log(hi)))
            else:
                point[j] = rng.uniform(lo, hi)
        starts.append(point)

    lower = np.asarray([b[0] for b in bounds])
    upper = np.asarray([b[1] for b in bounds])
    best = None
    for x0 in starts:
        fit = least_squares(residuals, x0, bounds=(lower, upper), method="trf",
                            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000)
        if best is None or fit.cost < best.cost:
            best = fit

    init_cost = 0.5 * float(np.sum(residuals(x_init) ** 2))
    residual_norm = math.sqrt(2.0 * best.cost)
    ses, singular = _nls_standard_errors(best.jac, best.cost, len(observations))
    means = {n: float(v) for n, v in zip(CPT_PARAMETER_NAMES, best.x)}
    return EstimationResult(
        means=means,
        sds={},
        se_means={n: float(s) for n, s in zip(CPT_PARAMETER_NAMES, ses)}
        if ses is not None else None,
        se_sds=None,
        objective=residual_norm,
        objective_name="residual_norm",
        converged=bool(best.status > 0) and best.cost <= init_cost + 1e-12,
        seed=seed,
        n_observations=len(observations),
        diagnostics={
            "n_starts": len(starts),
            "initial_residual_norm": math.sqrt(2.0 * init_cost),
            "solver_status": int(best.status),
            "solver_message": str(best.message),
            "singular_jacobian": singular,
        },
    )


def _nls_standard_errors(jac: np.ndarray, cost: float,
                         n_obs: int) -> tuple[np.ndarray | None, bool]:
    dof = n_obs - jac.shape[1]
    if dof <= 0:
        return None, True
    sigma2 = 2.0 * cost / dof
    jtj = jac.T @ jac
    try:
        cov = sigma2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return None, True
    diag = np.diag(cov)
    if np.any(~np.isfinite(diag)) or np.any(diag < 0):
        return None, True
    return np.sqrt(diag), False


# ---------------------------------------------------------------------------
# Lottery-effect detectors
# ---------------------------------------------------------------------------

_DETECT_TOL = 1e-9


@dataclass
class ReflectionResult:
    """Per-respondent reflection flags and the population rate."""

    per_respondent: dict[str, bool]
    rate: float | None
    n_respondents: int
    n_excluded: int


@dataclass(frozen=True)
class BandRate:
    band: tuple[float, float]
    rate: float | None
    n_flagged: int
    n_eligible: int


@dataclass
class ProbabilityWeightingResult:
    """Per-band overweighting rates plus the any-band aggregate."""

    bands: tuple[BandRate, ...]
    any_rate: float | None
    n_any_flagged: int
    n_any_eligible: int


@dataclass
class LossAversionResult:
    """Gain/loss ratios from mixed lotteries."""

    mean_ratio: float | None
    median_ratio: float | None
    per_respondent: dict[str, float]
    n_excluded_rows: int


def _deduped_by_respondent(responses: Iterable[LotteryResponse]
                           ) -> dict[str, list[LotteryResponse]]:
    """Group by respondent, ignoring ordering and duplicated records."""
    seen: set[tuple] = set()
    grouped: dict[str, list[LotteryResponse]] = {}
    for r in responses:
        key = (r.respondent_id, r.lottery_id, r.frame.value, r.p, r.gain, r.loss, r.response)
        if key in seen:
            continue
        seen.add(key)
        grouped.setdefault(str(r.respondent_id), []).append(r)
    return {rid: grouped[rid] for rid in sorted(grouped)}


def detect_reflection_effect(responses: Iterable[LotteryResponse]) -> ReflectionResult:
    """Flag respondents who are risk averse in gains and risk seeking in losses.

    A gain-frame lottery and a loss-frame lottery are matched when they
    share the probability and the outcome magnitude.  A pair reflects when
    the gain certainty equivalent sits strictly below the lottery's
    expected value while the loss certainty equivalent sits strictly
    above its (negative) expected value.  A respondent is flagged when a
    majority of their matched pairs reflect; respondents without any
    matched pair are excluded.
    """
    grouped = _deduped_by_respondent(responses)
    flags: dict[str, bool] = {}
    n_excluded = 0
    for rid, rows in grouped.items():
        gains = {(round(r.p, 12), round(r.gain, 12)): r.response
                 for r in rows if r.frame is Frame.GAIN}
        losses = {(round(r.p, 12), round(r.loss, 12)): r.response
                  for r in rows if r.frame is Frame.LOSS}
        matched = sorted(set(gains) & set(losses))
        if not matched:
            n_excluded += 1
            continue
        n_reflecting = 0
        for p, magnitude in matched:
            ev_gain = p * magnitude
            ev_loss = -p * magnitude
            averse_in_gains = gains[(p, magnitude)] < ev_gain - _DETECT_TOL * max(1.0, ev_gain)
            seeking_in_losses = losses[(p, magnitude)] > ev_loss + _DETECT_TOL * max(1.0, -ev_loss)
            n_reflecting += averse_in_gains and seeking_in_losses
        flags[rid] = n_reflecting * 2 > len(matched)
    rate = sum(flags.values()) / len(flags) if flags else None
    return ReflectionResult(per_respondent=flags, rate=rate,
                            n_respondents=len(flags), n_excluded=n_excluded)


_DEFAULT_BANDS: tuple[tuple[float, float], ...] = ((0.1, 0.6), (0.6, 0.9), (0.1, 0.9))


def _log_relative_value(rows: list[LotteryResponse], level: float) -> float | None:
    """Average of -ln(CE/G) over a respondent's gain lotteries at one probability."""
    values = []
    for r in rows:
        if r.frame is Frame.GAIN and round(r.p, 12) == round(level, 12):
            if 0.0 < r.response < r.gain:
                values.append(-math.log(r.response / r.gain))
    return float(np.mean(values)) if values else None


def detect_probability_weighting(responses: Iterable[LotteryResponse],
                                 bands: Sequence[tuple[float, float]] = _DEFAULT_BANDS,
                                 ) -> ProbabilityWeightingResult:
    """Per-band rates of respondents whose answers imply probability overweighting.

    For a band (p1, p2) the certainty equivalents of simple gain lotteries
    at the two endpoint probabilities identify a local distortion
    exponent: under a power value function with Prelec weighting,
    ln(-ln(CE/G)) is linear in ln(-ln p) with slope alpha, and the
    value-function curvature drops out of the two-point slope.  A
    respondent overweights within the band when the implied weighting
    function exceeds the identity somewhere between the endpoints.
    Respondents lacking an endpoint level are excluded from that band;
    a level absent from the whole lottery set raises an error.
    """
    grouped = _deduped_by_respondent(responses)
    levels_present = {round(r.p, 12) for rows in grouped.values()
                      for r in rows if r.frame is Frame.GAIN}
    missing = {level for band in bands for level in band
               if round(level, 12) not in levels_present}
    if missing:
        raise SchemaError(
            "lottery set has no gain-frame questions at probability "
            f"levels {sorted(missing)}")

    band_rates = []
    any_flagged: dict[str, bool] = {}
    for p1, p2 in bands:
        flags: dict[str, bool] = {}
        for rid, rows in grouped.items():
            h1 = _log_relative_value(rows, p1)
            h2 = _log_relative_value(rows, p2)
            if h1 is None or h2 is None or h1 <= 0 or h2 <= 0:
                continue
            s1, s2 = -math.log(p1), -math.log(p2)
            alpha_hat = (math.log(h1) - math.log(h2)) / (math.log(s1) - math.log(s2))
            if alpha_hat <= 0:
                continue
            grid = np.linspace(p1, p2, 201)
            implied = np.exp(-((-np.log(grid)) ** alpha_hat))
            flags[rid] = bool(np.max(implied - grid) > _DETECT_TOL)
        rate = sum(flags.values()) / len(flags) if flags else None
        band_rates.append(BandRate((p1, p2), rate, sum(flags.values()), len(flags)))
        for rid, flag in flags.items():
            any_flagged[rid] = any_flagged.get(rid, False) or flag
    any_rate = sum(any_flagged.values()) / len(any_flagged) if any_flagged else None
    return ProbabilityWeightingResult(
        bands=tuple(band_rates),
        any_rate=any_rate,
        n_any_flagged=sum(any_flagged.values()),
        n_any_eligible=len(any_flagged),
    )


def loss_aversion_ratio(responses: Iterable[LotteryResponse]) -> LossAversionResult:
    """Acceptable gain per unit loss in mixed lotteries, per respondent.

    Each mixed lottery contributes response / loss; a respondent's ratio
    is the mean over their mixed lotteries, and the population mean and
    median are taken across respondents.  Ratios above 1 signal loss
    aversion.  Zero-loss rows carry no information and are excluded.
    """
    grouped = _deduped_by_respondent(responses)
    per_respondent: dict[str, float] = {}
    n_excluded = 0
    for rid, rows in grouped.items():
        ratios = []
        for r in rows:
            if r.frame is not Frame.MIXED:
                continue
            if r.loss == 0:
                n_excluded += 1
                continue
            ratios.append(r.response / r.loss)
        if ratios:
            per_respondent[rid] = float(np.mean(ratios))
    values = np.asarray(list(per_respondent.values()))
    return LossAversionResult(
        mean_ratio=float(values.mean()) if values.size else None,
        median_ratio=float(np.median(values)) if values.size else None,
        per_respondent=per_respondent,
        n_excluded_rows=n_excluded,
    )
