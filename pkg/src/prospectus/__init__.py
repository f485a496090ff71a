"""Utility-theory and cumulative-prospect-theory models of travel mode choice.

The package provides objective (expected-utility, logit) and subjective
(cumulative prospect theory) valuations of risky travel options, parameter
estimation from choice and lottery data, and the computational experiments
comparing the two frameworks.
"""

from .choice import (
    TripOption,
    binary_choice_probability,
    expected_utility,
    logit_probabilities,
    objective_acceptance_probability,
    srs_two_point_utilities,
    trip_utility,
    value_of_time,
)
from .cpt import (
    SubjectiveUtility,
    certain_prospect_subjective_value,
    decision_weights,
    subjective_acceptance_probability,
    subjective_utility_continuous,
    subjective_utility_discrete,
    value_function,
    weighting_function,
)
from .errors import (
    ConvergenceError,
    DomainError,
    IdentifiabilityError,
    InvalidProspectError,
    InvalidSetupError,
    ProspectusError,
    QuadratureError,
    SchemaError,
    SeparationError,
)
from .prospects import (
    BernoulliTwoPoint,
    ContinuousProspect,
    DiscreteProspect,
    TruncatedNormal,
    TruncatedPoisson,
    UniformProspect,
    bernoulli_cdf,
    discretize,
    truncated_poisson_pmf,
)
from .types import (
    CertainProspect,
    CptParams,
    Mode,
    Reference,
    Static,
    TariffLinked,
    TripTimes,
    UtilityCoefficients,
    resolve_reference,
)

__version__ = "0.1.0"
