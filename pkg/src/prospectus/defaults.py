"""Bundled default parameter estimates.

Mode-choice coefficients and risk-preference parameters estimated from a
stated-preference survey of about a thousand riders choosing between
public transit, exclusive ride-hailing and pooled ride-sharing.  They are
the defaults for the command-line tools and the computational
experiments; every value can be overridden through a run configuration.
"""

from __future__ import annotations

from .types import CptParams, Mode, UtilityCoefficients

# Random-coefficient logit estimates: per-minute and per-dollar weights.
# Each entry is (mean, se_mean, sd, se_sd).
MODE_CHOICE_ESTIMATES: dict[str, tuple[float, float, float, float]] = {
    "a_walk": (-0.0586, 0.0053, 0.1412, 0.0079),
    "a_wait": (-0.0113, 0.0182, 0.1491, 0.0356),
    "a_ride_transit": (-0.0105, 0.0013, 0.0284, 0.0017),
    "a_ride_uberx": (-0.0086, 0.0014, 0.0058, 0.0010),
    "a_ride_srs": (-0.0186, 0.0013, 0.0095, 0.0007),
    "b": (-0.0518, 0.0050, 0.0597, 0.0042),
    "c_uberx": (-2.5926, 0.1800, 2.3034, 0.1558),
    "c_srs": (-2.2230, 0.1497, 1.8175, 0.1530),
}

# Risk-preference estimates from certainty-equivalent elicitation:
# (mean, median, sd) per parameter.
CPT_ESTIMATES: dict[str, tuple[float, float, float]] = {
    "alpha_gain": (0.4456, 0.4124, 0.1828),
    "alpha_loss": (0.1315, 0.1320, 0.0448),
    "beta_gain": (0.2166, 0.2188, 0.0985),
    "beta_loss": (0.3550, 0.3649, 0.1906),
    "loss_aversion": (20.0494, 11.8715, 25.8554),
}


def utility_coefficients() -> UtilityCoefficients:
    """Default mode-choice coefficients (estimate means)."""
    mean = {name: values[0] for name, values in MODE_CHOICE_ESTIMATES.items()}
    return UtilityCoefficients(
        a_walk=mean["a_walk"],
        a_wait=mean["a_wait"],
        a_ride={
            Mode.TRANSIT: mean["a_ride_transit"],
            Mode.UBERX: mean["a_ride_uberx"],
            Mode.SRS: mean["a_ride_srs"],
        },
        b=mean["b"],
        c={Mode.TRANSIT: 0.0, Mode.UBERX: mean["c_uberx"], Mode.SRS: mean["c_srs"]},
    )


def coefficient_sds() -> dict[str, float]:
    """Population standard deviations of the random coefficients."""
    return {name: values[2] for name, values in MODE_CHOICE_ESTIMATES.items()}


def cpt_params(sign_dependent_alpha: bool = True) -> CptParams:
    """Default risk-preference parameters (estimate means).

    With ``sign_dependent_alpha`` false, the gain-side distortion exponent
    is used in both regimes; the computational experiments default to that
    single-exponent form.
    """
    mean = {name: values[0] for name, values in CPT_ESTIMATES.items()}
    alpha_loss = mean["alpha_loss"] if sign_dependent_alpha else mean["alpha_gain"]
    return CptParams(
        alpha_gain=mean["alpha_gain"],
        alpha_loss=alpha_loss,
        beta_gain=mean["beta_gain"],
        beta_loss=mean["beta_loss"],
        loss_aversion=mean["loss_aversion"],
    )
