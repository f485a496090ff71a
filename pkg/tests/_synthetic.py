"""Synthetic data generators shared by the estimation tests and fixtures.

Choice data comes from a population with normally distributed taste
coefficients around the bundled estimates; the mode-choice generator
deliberately re-implements the utility arithmetic instead of calling the
package so that round-trip tests exercise an independent data path.
Lottery and certainty-equivalent generators simulate coherent
prospect-theory agents (risk engine formulas in closed form).
"""

from __future__ import annotations

import math

import numpy as np

from prospectus import CptParams, Mode, TripTimes
from prospectus.choice import TripOption
from prospectus.defaults import MODE_CHOICE_ESTIMATES
from prospectus.estimation import (
    CertaintyEquivalentObservation,
    ChoiceObservation,
    Frame,
    LotteryResponse,
)

MEANS = {name: values[0] for name, values in MODE_CHOICE_ESTIMATES.items()}
SDS = {name: values[2] for name, values in MODE_CHOICE_ESTIMATES.items()}

# Attribute ranges of the synthetic stated-choice design; wide independent
# variation keeps all coefficients and their population spreads identified.
_DESIGN = {
    Mode.TRANSIT: ((0, 25), (0, 20), (5, 60), (0.5, 5)),
    Mode.UBERX: ((0, 8), (0, 12), (5, 45), (5, 35)),
    Mode.SRS: ((0, 15), (0, 18), (5, 55), (2, 25)),
}


def _utility(beta: dict[str, float], mode: Mode, times, tariff: float) -> float:
    constants = {Mode.TRANSIT: 0.0, Mode.UBERX: beta["c_uberx"], Mode.SRS: beta["c_srs"]}
    return (beta["a_walk"] * times[0] + beta["a_wait"] * times[1]
            + beta[f"a_ride_{mode.value}"] * times[2]
            + beta["b"] * tariff + constants[mode])


def make_choice_data(n_respondents: int, n_situations: int, seed: int,
                     random_coefficients=("a_walk", "a_wait", "b", "c_srs"),
                     ) -> list[ChoiceObservation]:
    """Panel of stated choices from a heterogeneous logit population.

    Coefficients listed in ``random_coefficients`` vary across respondents
    (normal around the bundled means with the bundled spreads); the rest
    are fixed at their means.  One independent per-respondent stream keeps
    the data reproducible and order-independent.
    """
    master = np.random.SeedSequence(seed)
    observations = []
    for r, child in enumerate(master.spawn(n_respondents)):
        rng = np.random.default_rng(child)
        beta = {name: (rng.normal(MEANS[name], SDS[name])
                       if name in random_coefficients else MEANS[name])
                for name in MEANS}
        for _ in range(n_situations):
            options = []
            utilities = []
            for mode, ranges in _DESIGN.items():
                times = tuple(rng.uniform(lo, hi) for lo, hi in ranges[:3])
                tariff = float(rng.uniform(*ranges[3]))
                options.append(TripOption(mode, TripTimes(*times), tariff))
                utilities.append(_utility(beta, mode, times, tariff))
            u = np.asarray(utilities)
            p = np.exp(u - u.max())
            p /= p.sum()
            chosen = int(rng.choice(len(options), p=p))
            observations.append(ChoiceObservation(f"r{r:05d}", tuple(options), chosen))
    return observations


def prelec(p: float, alpha: float) -> float:
    return math.exp(-((-math.log(p)) ** alpha))


def agent_certainty_equivalent(u_lo: float, u_hi: float, p_lo: float,
                               params: CptParams) -> float:
    """Closed-form certainty equivalent of a two-outcome prospect (reference 0)."""
    if u_lo >= 0:  # pure gain
        w_hi = prelec(1.0 - p_lo, params.alpha_gain)
        u_s = (1.0 - w_hi) * u_lo ** params.beta_gain + w_hi * u_hi ** params.beta_gain
    elif u_hi <= 0:  # pure loss
        w_lo = prelec(p_lo, params.alpha_loss)
        u_s = -params.loss_aversion * (
            w_lo * (-u_lo) ** params.beta_loss
            + (1.0 - w_lo) * (-u_hi) ** params.beta_loss)
    else:  # mixed
        u_s = (prelec(1.0 - p_lo, params.alpha_gain) * u_hi ** params.beta_gain
               - params.loss_aversion * prelec(p_lo, params.alpha_loss)
               * (-u_lo) ** params.beta_loss)
    if u_s >= 0:
        return u_s ** (1.0 / params.beta_gain)
    return -((-u_s / params.loss_aversion) ** (1.0 / params.beta_loss))


DEFAULT_CE_LOTTERIES: list[tuple[float, float, float]] = (
    [(0.0, g, 1.0 - p) for g in (10.0, 20.0, 40.0) for p in (0.1, 0.25, 0.5, 0.75, 0.9)]
    + [(-l, 0.0, p) for l in (10.0, 20.0, 40.0) for p in (0.1, 0.25, 0.5, 0.75, 0.9)]
    + [(-l, g, p) for l, g in ((5.0, 50.0), (10.0, 100.0), (20.0, 300.0))
       for p in (0.25, 0.5, 0.75)]
)


def make_ce_observations(params: CptParams, noise_sd: float = 0.0, seed: int = 0,
                         lotteries=None) -> list[CertaintyEquivalentObservation]:
    """Certainty equivalents of a coherent agent, optionally with noise.

    Noise is multiplicative on the certainty equivalent and clipped so the
    answer stays inside the outcome range.
    """
    rng = np.random.default_rng(seed)
    observations = []
    for u_lo, u_hi, p_lo in (lotteries or DEFAULT_CE_LOTTERIES):
        ce = agent_certainty_equivalent(u_lo, u_hi, p_lo, params)
        if noise_sd > 0:
            ce *= 1.0 + rng.normal(0.0, noise_sd)
        margin = 1e-9 * (u_hi - u_lo)
        ce = min(max(ce, u_lo + margin), u_hi - margin)
        observations.append(CertaintyEquivalentObservation(u_lo, u_hi, p_lo, ce))
    return observations


def acceptable_mixed_gain(loss: float, params: CptParams, cap_ratio: float = 1000.0) -> float:
    """Smallest gain making a 50/50 win-G / lose-loss gamble acceptable.

    Solves the zero of the subjective utility in closed form; capped at
    cap_ratio * loss, mimicking the bounded answer scale of a survey.
    """
    w_gain = prelec(0.5, params.alpha_gain)
    w_loss = prelec(0.5, params.alpha_loss)
    g = (params.loss_aversion * (w_loss / w_gain)
         * loss ** params.beta_loss) ** (1.0 / params.beta_gain)
    return min(g, cap_ratio * loss)


GAIN_LEVELS = (0.1, 0.6, 0.9)


def make_lottery_responses(population: list[CptParams], noise_sd: float = 0.0,
                           seed: int = 0, amount: float = 100.0,
                           mixed_losses=(10.0, 25.0)) -> list[LotteryResponse]:
    """Lottery answers for a population of coherent agents.

    Each respondent answers gain and loss certainty-equivalent questions
    at the standard probability levels (matched magnitudes, so reflection
    pairs exist) plus mixed acceptability questions.
    """
    rng = np.random.default_rng(seed)
    responses = []
    for r, params in enumerate(population):
        rid = f"a{r:04d}"
        lottery = 0
        for p in GAIN_LEVELS:
            ce = agent_certainty_equivalent(0.0, amount, 1.0 - p, params)
            if noise_sd > 0:
                ce = float(np.clip(ce * (1.0 + rng.normal(0.0, noise_sd)),
                                   1e-9 * amount, amount * (1.0 - 1e-9)))
            responses.append(LotteryResponse(rid, f"q{lottery}", Frame.GAIN,
                                             p, amount, 0.0, ce))
            lottery += 1
            ce = agent_certainty_equivalent(-amount, 0.0, p, params)
            if noise_sd > 0:
                ce = float(np.clip(ce * (1.0 + rng.normal(0.0, noise_sd)),
                                   -amount * (1.0 - 1e-9), -1e-9 * amount))
            responses.append(LotteryResponse(rid, f"q{lottery}", Frame.LOSS,
                                             p, 0.0, amount, ce))
            lottery += 1
        for loss in mixed_losses:
            g = acceptable_mixed_gain(loss, params)
            if noise_sd > 0:
                g *= 1.0 + abs(rng.normal(0.0, noise_sd))
            responses.append(LotteryResponse(rid, f"q{lottery}", Frame.MIXED,
                                             0.5, 0.0, loss, g))
            lottery += 1
    return responses
