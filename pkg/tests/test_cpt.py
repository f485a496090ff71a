import math

import mpmath
import numpy as np
import pytest

from conftest import random_prospect
from prospectus import (
    BernoulliTwoPoint,
    CertainProspect,
    CptParams,
    DiscreteProspect,
    DomainError,
    InvalidSetupError,
    Static,
    TariffLinked,
    TruncatedNormal,
    TruncatedPoisson,
    UniformProspect,
    certain_prospect_subjective_value,
    decision_weights,
    discretize,
    expected_utility,
    objective_acceptance_probability,
    resolve_reference,
    subjective_acceptance_probability,
    subjective_utility_continuous,
    subjective_utility_discrete,
    value_function,
    weighting_function,
)


class TestValueFunction:
    def test_zero_at_reference(self, cpt_means):
        assert value_function(1.7, 1.7, cpt_means) == 0.0

    def test_linear_reduction(self):
        params = CptParams(0.5, 0.5, 1.0, 1.0, 1.0)
        for u in (-3.0, -0.5, 0.0, 2.0):
            assert value_function(u, 1.0, params) == pytest.approx(u - 1.0, abs=1e-15)

    def test_loss_scaling_at_unit_distance(self, cpt_means):
        # the unit exponent is forced: (1)^beta == 1 regardless of beta
        assert value_function(-1.0, 0.0, cpt_means) == pytest.approx(-20.0494)

    def test_strictly_increasing_and_continuous_at_reference(self, cpt_means):
        grid = np.linspace(-5.0, 5.0, 2001)
        values = value_function(grid, 0.0, cpt_means)
        assert np.all(np.diff(values) > 0)
        eps = 1e-12
        assert abs(value_function(eps, 0.0, cpt_means)) < 1e-2
        assert abs(value_function(-eps, 0.0, cpt_means)) < 1e-2


class TestWeightingFunction:
    def test_endpoints_pinned(self):
        for alpha in (0.1315, 0.4456, 0.9, 1.0):
            assert weighting_function(0.0, alpha) == 0.0
            assert weighting_function(1.0, alpha) == 1.0

    def test_identity_at_alpha_one(self):
        for p in (0.1, 0.5, 0.9):
            assert weighting_function(p, 1.0) == p

    def test_reference_value(self):
        mpmath.mp.dps = 40
        oracle = float(mpmath.exp(-((-mpmath.log(mpmath.mpf("0.5"))) ** mpmath.mpf("0.4456"))))
        computed = weighting_function(0.5, 0.4456)
        assert computed == pytest.approx(oracle, abs=1e-14)
        assert computed == pytest.approx(0.4277, abs=5e-5)

    def test_strictly_increasing(self):
        grid = np.linspace(0.0, 1.0, 1001)
        for alpha in (0.1315, 0.4456, 1.0):
            values = weighting_function(grid, alpha)
            assert np.all(np.diff(values) > 0)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            weighting_function(-0.1, 0.5)
        with pytest.raises(DomainError):
            weighting_function(1.1, 0.5)
        with pytest.raises(DomainError):
            weighting_function(0.5, 0.0)
        with pytest.raises(DomainError):
            weighting_function(0.5, 1.5)


class TestDecisionWeights:
    def test_identity_weighting_recovers_probabilities(self, rng):
        params = CptParams(1.0, 1.0, 0.5, 0.5, 2.0)
        for _ in range(100):
            p = random_prospect(rng)
            w = decision_weights(p, rng.normal(0, 5), params)
            np.testing.assert_allclose(w, p.probability_array(), atol=1e-14)

    def test_two_nonlosses_telescope(self):
        params = CptParams(1.0, 1.0, 1.0, 1.0, 1.0)
        prospect = DiscreteProspect((1.0, 2.0), (0.3, 0.7))
        np.testing.assert_allclose(
            decision_weights(prospect, 0.0, params), [0.3, 0.7], atol=1e-15)

    def test_two_losses_against_direct_construction(self):
        params = CptParams(0.5, 0.5, 1.0, 1.0, 1.0)
        prospect = DiscreteProspect((-3.0, -1.0), (0.25, 0.75))
        w = decision_weights(prospect, 0.0, params)
        pi_25 = math.exp(-math.sqrt(math.log(4.0)))
        # cumulative-from-below differences of the distorted step CDF
        assert w[0] == pytest.approx(pi_25, abs=1e-15)
        assert w[1] == pytest.approx(1.0 - pi_25, abs=1e-15)

    def test_nonnegative_across_alpha(self, rng):
        for alpha in (0.05, 0.1315, 0.4456, 0.8, 1.0):
            params = CptParams(alpha, alpha, 0.5, 0.5, 2.0)
            for _ in range(25):
                p = random_prospect(rng)
                assert np.all(decision_weights(p, rng.normal(0, 5), params) >= 0)

    def test_pure_frame_weights_sum_to_one(self, rng, cpt_means):
        for _ in range(25):
            p = random_prospect(rng)
            lo, hi = p.support()
            below = decision_weights(p, lo - 1.0, cpt_means)   # all non-losses
            above = decision_weights(p, hi + 1.0, cpt_means)   # all losses
            assert below.sum() == pytest.approx(1.0, abs=1e-9)
            assert above.sum() == pytest.approx(1.0, abs=1e-9)

    def test_outcome_at_reference_counts_as_gain(self):
        params = CptParams(0.5, 0.9, 1.0, 1.0, 1.0)
        prospect = DiscreteProspect((0.0, 1.0), (0.4, 0.6))
        w = decision_weights(prospect, 0.0, params)
        # both outcomes on the gain side: weights telescope under alpha_gain
        assert w[1] == pytest.approx(weighting_function(0.6, 0.5), abs=1e-15)
        assert w[0] == pytest.approx(1.0 - weighting_function(0.6, 0.5), abs=1e-15)


class TestSubjectiveUtilityDiscrete:
    def test_degenerate_prospect_is_value(self, cpt_means):
        prospect = DiscreteProspect((-4.0,), (1.0,))
        s = subjective_utility_discrete(prospect, 0.0, cpt_means)
        assert s.value == pytest.approx(value_function(-4.0, 0.0, cpt_means), abs=1e-15)

    def test_reduction_to_expected_utility(self, rng, risk_neutral):
        for _ in range(200):
            p = random_prospect(rng)
            s = subjective_utility_discrete(p, 0.0, risk_neutral)
            assert abs(s.value - expected_utility(p)) < 1e-12

    def test_mean_reference_negative_for_large_loss_aversion(self, rng, cpt_means):
        for _ in range(25):
            p = random_prospect(rng)
            s = subjective_utility_discrete(p, expected_utility(p), cpt_means)
            assert s.value < 0

    def test_tariff_linked_reference_resolution(self, cpt_single_alpha):
        prospect = DiscreteProspect((-9.5, -5.5), (0.5, 0.5))
        ref = TariffLinked(-5.0)
        s = subjective_utility_discrete(prospect, ref, cpt_single_alpha,
                                        tariff=10.0, tariff_coefficient=-0.05)
        assert s.reference_used == pytest.approx(-5.5)
        with pytest.raises(InvalidSetupError):
            subjective_utility_discrete(prospect, ref, cpt_single_alpha)


class TestSubjectiveUtilityContinuous:
    def test_bernoulli_matches_discrete(self, cpt_means):
        prospect = BernoulliTwoPoint(-9.0, -5.0, 0.3)
        cont = subjective_utility_continuous(prospect, -6.0, cpt_means)
        disc = subjective_utility_discrete(prospect.atoms(), -6.0, cpt_means)
        assert cont.value == pytest.approx(disc.value, abs=1e-8)

    def test_normal_reduces_to_mean(self, risk_neutral):
        prospect = TruncatedNormal(-2.0, 0.5)
        s = subjective_utility_continuous(prospect, 0.0, risk_neutral)
        assert s.value == pytest.approx(prospect.mean(), abs=1e-6)

    def test_normal_against_fine_discretization(self, cpt_means):
        prospect = TruncatedNormal(-2.0, 0.5)
        cont = subjective_utility_continuous(prospect, -2.0, cpt_means).value
        disc = subjective_utility_discrete(
            discretize(prospect, 100_000), -2.0, cpt_means).value
        assert abs(cont - disc) / (1 + abs(disc)) < 1e-4

    @pytest.mark.parametrize("prospect", [
        BernoulliTwoPoint(-9.0, -5.0, 0.5),
        TruncatedPoisson(4.0, 5, -5.0, -9.0),
        TruncatedNormal(-7.0, 2.0 / 3.0, -9.0, -5.0),
        UniformProspect(-9.0, -5.0),
    ], ids=["bernoulli", "poisson", "normal", "uniform"])
    @pytest.mark.parametrize("reference", [-10.0, -7.0, -6.2, -4.0])
    def test_families_match_discretization_oracle(self, prospect, reference, cpt_means):
        cont = subjective_utility_continuous(prospect, reference, cpt_means).value
        disc = subjective_utility_discrete(
            discretize(prospect, 100_000), reference, cpt_means).value
        assert abs(cont - disc) / (1 + abs(disc)) < 1e-4

    def test_reference_outside_support(self, cpt_means):
        prospect = UniformProspect(0.0, 1.0)
        all_gains = subjective_utility_continuous(prospect, -1.0, cpt_means)
        all_losses = subjective_utility_continuous(prospect, 2.0, cpt_means)
        assert all_gains.value > 0
        assert all_losses.value < 0


class TestAcceptanceProbabilitySubjective:
    def test_equal_utilities(self, cpt_means):
        from prospectus.cpt import SubjectiveUtility
        a = SubjectiveUtility(-2.0, 0.0)
        b = SubjectiveUtility(-2.0, 0.0)
        assert subjective_acceptance_probability(a, b) == 0.5

    def test_analytic_sigmoid(self):
        from prospectus.cpt import SubjectiveUtility
        p = subjective_acceptance_probability(
            SubjectiveUtility(0.0, 0.0), SubjectiveUtility(-1.0, 0.0))
        assert p == pytest.approx(1.0 / (1.0 + math.exp(-1.0)))

    def test_reduces_to_objective(self, rng, risk_neutral):
        for _ in range(50):
            p1, p2 = random_prospect(rng), random_prospect(rng)
            s1 = subjective_utility_discrete(p1, 0.0, risk_neutral)
            s2 = subjective_utility_discrete(p2, 0.0, risk_neutral)
            assert subjective_acceptance_probability(s1, s2) == pytest.approx(
                objective_acceptance_probability(expected_utility(p1), expected_utility(p2)),
                abs=1e-12)

    def test_mismatched_references_rejected(self):
        from prospectus.cpt import SubjectiveUtility
        with pytest.raises(DomainError):
            subjective_acceptance_probability(
                SubjectiveUtility(0.0, 0.0), SubjectiveUtility(0.0, 1.0))


class TestCertainProspect:
    def test_zero_at_reference(self, cpt_means):
        s = certain_prospect_subjective_value(CertainProspect(-7.0), -7.0, cpt_means)
        assert s.value == 0.0

    def test_linear_gain(self):
        params = CptParams(0.5, 0.5, 1.0, 0.5, 2.0)
        s = certain_prospect_subjective_value(CertainProspect(-5.0), -7.0, params)
        assert s.value == pytest.approx(2.0)

    def test_loss_matches_value_function(self, cpt_means):
        s = certain_prospect_subjective_value(CertainProspect(-7.0), 0.0, cpt_means)
        assert s.value == pytest.approx(value_function(-7.0, 0.0, cpt_means), abs=1e-15)
        assert s.value == pytest.approx(-20.0494 * 7.0 ** 0.3550, rel=1e-12)


class TestReferenceResolution:
    def test_static(self):
        assert resolve_reference(Static(1.5)) == 1.5
        assert resolve_reference(2.5) == 2.5

    def test_tariff_linked(self):
        ref = TariffLinked(-5.0)
        assert resolve_reference(ref, tariff=10.0, tariff_coefficient=-0.0518) == \
            pytest.approx(-5.518)
        with pytest.raises(InvalidSetupError):
            resolve_reference(ref, tariff=10.0)
