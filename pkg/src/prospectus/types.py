"""Core domain types: trips, utility coefficients, risk parameters, references.

All types are frozen dataclasses validated at construction; instances are
immutable and safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Mapping, Union

from .errors import DomainError, InvalidSetupError

__all__ = [
    "Mode",
    "TripTimes",
    "UtilityCoefficients",
    "CptParams",
    "Static",
    "TariffLinked",
    "Reference",
    "CertainProspect",
    "resolve_reference",
]


class Mode(enum.Enum):
    """Travel modes of the three-alternative choice setting."""

    TRANSIT = "transit"
    UBERX = "uberx"
    SRS = "srs"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TripTimes:
    """Walking, waiting and riding times of a trip, in minutes."""

    walk: float
    wait: float
    ride: float

    def __post_init__(self):
        for name in ("walk", "wait", "ride"):
            value = _require_finite(name, getattr(self, name))
            if value < 0:
                raise DomainError(f"{name} time must be non-negative, got {value}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.walk, self.wait, self.ride)


@dataclass(frozen=True)
class UtilityCoefficients:
    """Linear-in-attributes utility weights for the mode-choice model.

    Time and tariff weights are disutilities and must be strictly negative.
    Riding time has a mode-specific weight; the mode constants absorb
    everything that depends on neither time nor tariff (transit is the
    conventional zero baseline).
    """

    a_walk: float
    a_wait: float
    a_ride: Mapping[Mode, float]
    b: float
    c: Mapping[Mode, float]

    def __post_init__(self):
        for name in ("a_walk", "a_wait", "b"):
            value = _require_finite(name, getattr(self, name))
            if value >= 0:
                raise DomainError(f"{name} must be strictly negative, got {value}")
            object.__setattr__(self, name, value)
        a_ride = dict(self.a_ride)
        c = dict(self.c)
        for mapping, label, negative in ((a_ride, "a_ride", True), (c, "c", False)):
            for mode in Mode:
                if mode not in mapping:
                    raise DomainError(f"{label} is missing an entry for {mode.value}")
            for mode, value in mapping.items():
                value = _require_finite(f"{label}[{mode.value}]", value)
                if negative and value >= 0:
                    raise DomainError(
                        f"{label}[{mode.value}] must be strictly negative, got {value}"
                    )
                mapping[mode] = value
        object.__setattr__(self, "a_ride", a_ride)
        object.__setattr__(self, "c", c)

    def time_weights(self, mode: Mode) -> tuple[float, float, float]:
        return (self.a_walk, self.a_wait, self.a_ride[mode])


@dataclass(frozen=True)
class CptParams:
    """Risk-preference parameters of the cumulative prospect model.

    alpha_gain / alpha_loss control the Prelec probability distortion in
    the gain and loss regimes, beta_gain / beta_loss the diminishing
    sensitivity of the value function, and loss_aversion scales losses.
    A loss_aversion above 1 encodes loss-averse behaviour; all of
    alpha/beta lie in (0, 1] and loss_aversion must be positive.
    """

    alpha_gain: float
    alpha_loss: float
    beta_gain: float
    beta_loss: float
    loss_aversion: float

    def __post_init__(self):
        for name in ("alpha_gain", "alpha_loss", "beta_gain", "beta_loss"):
            value = _require_finite(name, getattr(self, name))
            if not 0.0 < value <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1], got {value}")
            object.__setattr__(self, name, value)
        lam = _require_finite("loss_aversion", self.loss_aversion)
        if lam <= 0:
            raise DomainError(f"loss_aversion must be positive, got {lam}")
        object.__setattr__(self, "loss_aversion", lam)

    @classmethod
    def risk_neutral(cls) -> "CptParams":
        """Parameters under which the model reduces to expected utility."""
        return cls(1.0, 1.0, 1.0, 1.0, 1.0)

    def with_linear_value(self) -> "CptParams":
        """Copy with the value function made linear (distortion only)."""
        return replace(self, beta_gain=1.0, beta_loss=1.0, loss_aversion=1.0)


@dataclass(frozen=True)
class Static:
    """A fixed reference point in utility units."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", _require_finite("reference value", self.value))


@dataclass(frozen=True)
class TariffLinked:
    """A reference point that moves with the tariff: R = x_tilde + b * gamma."""

    x_tilde: float

    def __post_init__(self):
        object.__setattr__(self, "x_tilde", _require_finite("x_tilde", self.x_tilde))


Reference = Union[Static, TariffLinked]


def resolve_reference(reference: Union[Reference, float], *,
                      tariff: float | None = None,
                      tariff_coefficient: float | None = None) -> float:
    """Resolve a reference policy to a concrete reference utility.

    Plain floats are treated as static references. A tariff-linked
    reference needs both the tariff and the tariff coefficient.
    """
    if isinstance(reference, Static):
        return reference.value
    if isinstance(reference, TariffLinked):
        if tariff is None or tariff_coefficient is None:
            raise InvalidSetupError(
                "a tariff-linked reference requires tariff and tariff_coefficient"
            )
        resolved = reference.x_tilde + tariff_coefficient * tariff
        return _require_finite("resolved reference", resolved)
    return _require_finite("reference", reference)


@dataclass(frozen=True)
class CertainProspect:
    """A prospect with a single guaranteed utility outcome."""

    utility: float

    def __post_init__(self):
        object.__setattr__(self, "utility", _require_finite("utility", self.utility))
