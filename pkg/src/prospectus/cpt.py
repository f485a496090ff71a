"""Cumulative prospect theory engine.

Subjective value of outcomes relative to a reference point, Prelec
probability distortion, rank- and sign-dependent decision weights, and
the resulting subjective utility of discrete and continuous prospects
(Tversky & Kahneman 1992; Prelec 1998).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .errors import DomainError, QuadratureError
from .prospects import (
    ContinuousProspect,
    DiscreteProspect,
    _atoms_or_none,
)
from .types import CertainProspect, CptParams, Reference, resolve_reference

__all__ = [
    "SubjectiveUtility",
    "value_function",
    "weighting_function",
    "decision_weights",
    "subjective_utility_discrete",
    "subjective_utility_continuous",
    "subjective_acceptance_probability",
    "certain_prospect_subjective_value",
]

DEFAULT_QUAD_ABS_TOL = 1e-9
DEFAULT_QUAD_REL_TOL = 1e-8


@dataclass(frozen=True)
class SubjectiveUtility:
    """A subjective utility together with the reference it was computed against."""

    value: float
    reference_used: float


def value_function(u, reference: float, params: CptParams):
    """Reference-dependent subjective value of an outcome.

    v(u) = (u - R)^beta_gain           for u >= R
    v(u) = -lambda * (R - u)^beta_loss for u <  R

    Increasing in u, zero and continuous at the reference.  Accepts
    scalars or arrays.
    """
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("outcome utilities must be finite")
    gains = arr >= reference
    out = np.empty(arr.shape, dtype=float)
    out[gains] = (arr[gains] - reference) ** params.beta_gain
    out[~gains] = -params.loss_aversion * (reference - arr[~gains]) ** params.beta_loss
    return float(out) if out.ndim == 0 else out


def weighting_function(p, alpha: float):
    """Prelec probability distortion: pi(p) = exp(-(-ln p)^alpha).

    The endpoints are pinned exactly (pi(0) = 0, pi(1) = 1); alpha = 1 is
    the identity and is returned without rounding.  Accepts scalars or
    arrays.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    if alpha == 1.0:
        out = arr.copy()
    else:
        out = np.zeros(arr.shape, dtype=float)
        interior = (arr > 0.0) & (arr < 1.0)
        out[interior] = np.exp(-((-np.log(arr[interior])) ** alpha))
        out[arr == 1.0] = 1.0
    return float(out) if out.ndim == 0 else out


def _weighting_inverse(t, alpha: float):
    """Inverse of the Prelec function; underflow at tiny t maps to 0."""
    arr = np.asarray(t, dtype=float)
    out = np.zeros(arr.shape, dtype=float)
    interior = (arr > 0.0) & (arr < 1.0)
    with np.errstate(under="ignore"):
        out[interior] = np.exp(-((-np.log(arr[interior])) ** (1.0 / alpha)))
    out[arr >= 1.0] = 1.0
    return float(out) if out.ndim == 0 else out


def decision_weights(prospect: DiscreteProspect, reference: float,
                     params: CptParams) -> np.ndarray:
    """Rank- and sign-dependent decision weights of a discrete prospect.

    Losses (outcomes strictly below the reference) weight distorted
    cumulative probabilities from below; non-losses weight distorted
    decumulative probabilities from above:

        w_i = pi-[F(u_i)] - pi-[F(u_i-1)]          (losses)
        w_i = pi+[1 - F(u_i-1)] - pi+[1 - F(u_i)]  (non-losses)

    With both distortion exponents equal to 1 the differences telescope
    and the weights equal the raw probabilities.
    """
    cum = prospect.cumulative()
    cum_prev = np.concatenate(([0.0], cum[:-1]))
    n_loss = int(np.searchsorted(prospect.utility_array(), reference, side="left"))
    w = np.empty(prospect.n, dtype=float)
    w[:n_loss] = (weighting_function(cum[:n_loss], params.alpha_loss)
                  - weighting_function(cum_prev[:n_loss], params.alpha_loss))
    w[n_loss:] = (weighting_function(1.0 - cum_prev[n_loss:], params.alpha_gain)
                  - weighting_function(1.0 - cum[n_loss:], params.alpha_gain))
    return np.maximum(w, 0.0)


def subjective_utility_discrete(prospect: DiscreteProspect,
                                reference: Union[Reference, float],
                                params: CptParams,
                                *,
                                tariff: float | None = None,
                                tariff_coefficient: float | None = None) -> SubjectiveUtility:
    """Subjective utility of a discrete prospect: sum of w_i * v(u_i)."""
    r = resolve_reference(reference, tariff=tariff, tariff_coefficient=tariff_coefficient)
    w = decision_weights(prospect, r, params)
    values = value_function(prospect.utility_array(), r, params)
    return SubjectiveUtility(float(np.dot(w, values)), r)


def subjective_utility_continuous(prospect: ContinuousProspect,
                                  reference: Union[Reference, float],
                                  params: CptParams,
                                  *,
                                  tariff: float | None = None,
                                  tariff_coefficient: float | None = None,
                                  abs_tol: float = DEFAULT_QUAD_ABS_TOL,
                                  rel_tol: float = DEFAULT_QUAD_REL_TOL) -> SubjectiveUtility:
    """Subjective utility of a continuous prospect.

    Integrates the subjective value against the distorted probability
    measure on both sides of the reference.  Atomic prospects are
    evaluated through their exact discrete form.  For the absolutely
    continuous families the integrals are taken in distorted-weight
    coordinates, where the otherwise unbounded Prelec derivative at the
    support endpoints disappears: substituting t = pi(F(u)) on the loss
    side and t = pi(1 - F(u)) on the gain side gives

        U = int_0^{pi-(F(R))} v(Q(pi-^{-1}(t))) dt
          + int_0^{pi+(1-F(R))} v(Q(1 - pi+^{-1}(t))) dt

    with Q the quantile function; both integrands are bounded by the
    subjective values at the support endpoints.
    """
    atoms = _atoms_or_none(prospect)
    if atoms is not None:
        return subjective_utility_discrete(atoms, reference, params,
                                           tariff=tariff, tariff_coefficient=tariff_coefficient)
    r = resolve_reference(reference, tariff=tariff, tariff_coefficient=tariff_coefficient)
    f_at_r = prospect.cdf(r)

    total = 0.0
    total_err = 0.0

    t_loss = weighting_function(f_at_r, params.alpha_loss)
    if t_loss > 0.0:

        def loss_integrand(t: float) -> float:
            q = _weighting_inverse(t, params.alpha_loss)
            return value_function(prospect.quantile(q), r, params)

        val, err = _quad_checked(loss_integrand, t_loss, abs_tol, rel_tol, "loss side")
        total += val
        total_err += err

    t_gain = weighting_function(1.0 - f_at_r, params.alpha_gain)
    if t_gain > 0.0:

        def gain_integrand(t: float) -> float:
            q = _weighting_inverse(t, params.alpha_gain)
            return value_function(prospect.quantile(1.0 - q), r, params)

        val, err = _quad_checked(gain_integrand, t_gain, abs_tol, rel_tol, "gain side")
        total += val
        total_err += err

    if total_err > 10.0 * max(abs_tol, rel_tol * abs(total)):
        raise QuadratureError(
            f"integration error estimate {total_err:.3e} exceeds tolerance "
            f"(abs={abs_tol:.1e}, rel={rel_tol:.1e}, value={total:.6e})",
            estimate=total, error_estimate=total_err)
    return SubjectiveUtility(total, r)


def _quad_checked(fn, upper: float, abs_tol: float, rel_tol: float,
                  label: str) -> tuple[float, float]:
    out = quad(fn, 0.0, upper, epsabs=abs_tol, epsrel=rel_tol, limit=200, full_output=1)
    if len(out) > 3:
        raise QuadratureError(
            f"quadrature on the {label} did not converge: {out[3]}",
            estimate=out[0], error_estimate=out[1])
    return out[0], out[1]


def subjective_acceptance_probability(u1s: SubjectiveUtility,
                                      u2s: SubjectiveUtility) -> float:
    """Binary logit acceptance probability over subjective utilities.

    Both utilities must have been computed against the same reference.
    """
    if not math.isclose(u1s.reference_used, u2s.reference_used,
                        rel_tol=1e-9, abs_tol=1e-9):
        raise DomainError(
            f"subjective utilities use different references "
            f"({u1s.reference_used} vs {u2s.reference_used})")
    return float(expit(u1s.value - u2s.value))


def certain_prospect_subjective_value(prospect: Union[CertainProspect, float],
                                      reference: float,
                                      params: CptParams) -> SubjectiveUtility:
    """Subjective value of a guaranteed outcome; no weighting is involved."""
    u = prospect.utility if isinstance(prospect, CertainProspect) else float(prospect)
    return SubjectiveUtility(value_function(u, reference, params), reference)
