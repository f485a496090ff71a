import math

import mpmath
import numpy as np
import pytest

from prospectus import (
    DiscreteProspect,
    DomainError,
    Mode,
    TripTimes,
    binary_choice_probability,
    expected_utility,
    logit_probabilities,
    objective_acceptance_probability,
    srs_two_point_utilities,
    trip_utility,
    truncated_poisson_pmf,
    value_of_time,
)
from prospectus.choice import TripOption


class TestTripUtility:
    def test_zero_trip_zero_baseline(self, coeffs):
        option = TripOption(Mode.TRANSIT, TripTimes(0, 0, 0), 0.0)
        assert trip_utility(option, coeffs) == 0.0

    def test_transit_hand_value(self, coeffs):
        option = TripOption(Mode.TRANSIT, TripTimes(10, 5, 20), 0.0)
        assert trip_utility(option, coeffs) == pytest.approx(-0.8525, abs=1e-12)

    def test_srs_hand_value(self, coeffs):
        option = TripOption(Mode.SRS, TripTimes(0, 0, 30), 10.0)
        assert trip_utility(option, coeffs) == pytest.approx(-3.299, abs=1e-12)

    def test_decreasing_in_tariff_and_times(self, coeffs, rng):
        base = TripOption(Mode.UBERX, TripTimes(5, 5, 20), 10.0)
        u0 = trip_utility(base, coeffs)
        assert trip_utility(TripOption(Mode.UBERX, TripTimes(5, 5, 20), 11.0), coeffs) < u0
        assert trip_utility(TripOption(Mode.UBERX, TripTimes(6, 5, 20), 10.0), coeffs) < u0
        assert trip_utility(TripOption(Mode.UBERX, TripTimes(5, 6, 20), 10.0), coeffs) < u0
        assert trip_utility(TripOption(Mode.UBERX, TripTimes(5, 5, 21), 10.0), coeffs) < u0


class TestSrsTwoPoint:
    def test_degenerate(self, coeffs):
        t = TripTimes(0, 5, 20)
        u_lo, u_hi = srs_two_point_utilities(t, t, 10.0, coeffs)
        assert u_lo == u_hi

    def test_hand_difference(self, coeffs):
        u_lo, u_hi = srs_two_point_utilities(
            TripTimes(0, 8, 30), TripTimes(0, 4, 26), 10.0, coeffs)
        assert u_lo <= u_hi
        assert u_hi - u_lo == pytest.approx(0.0113 * 4 + 0.0186 * 4, abs=1e-12)

    def test_tariff_shifts_both_by_b(self, coeffs):
        t_hi, t_lo = TripTimes(0, 8, 30), TripTimes(0, 4, 26)
        base = srs_two_point_utilities(t_hi, t_lo, 10.0, coeffs)
        bumped = srs_two_point_utilities(t_hi, t_lo, 11.0, coeffs)
        assert bumped[0] - base[0] == pytest.approx(-0.0518, abs=1e-12)
        assert bumped[1] - base[1] == pytest.approx(-0.0518, abs=1e-12)

    def test_ordering_violation(self, coeffs):
        with pytest.raises(DomainError):
            srs_two_point_utilities(TripTimes(0, 4, 26), TripTimes(0, 8, 30), 10.0, coeffs)


class TestLogit:
    def test_uniform_over_equal_utilities(self):
        assert logit_probabilities([0.0, 0.0, 0.0]) == pytest.approx([1 / 3] * 3)

    def test_analytic_two_to_one(self):
        assert logit_probabilities([math.log(2), 0.0]) == pytest.approx([2 / 3, 1 / 3])

    def test_extreme_utilities_no_overflow(self):
        p = logit_probabilities([1000.0, 0.0])
        mpmath.mp.dps = 60
        expected = float(1 / (1 + mpmath.exp(-1000)))
        assert np.all(np.isfinite(p))
        assert p[0] == pytest.approx(expected, abs=1e-15)

    def test_requires_two(self):
        with pytest.raises(DomainError):
            logit_probabilities([1.0])

    def test_sums_to_one_and_shift_invariant(self, rng):
        for _ in range(200):
            u = rng.normal(0, 5, size=int(rng.integers(2, 8)))
            p = logit_probabilities(u)
            assert abs(p.sum() - 1.0) < 1e-12
            np.testing.assert_allclose(p, logit_probabilities(u + 17.3), atol=1e-12)


class TestBinaryChoice:
    def test_indifference(self):
        assert binary_choice_probability(0.0) == 0.5

    def test_analytic(self):
        assert binary_choice_probability(math.log(3)) == pytest.approx(0.75)
        assert binary_choice_probability(-math.log(3)) == pytest.approx(0.25)

    def test_matches_logit_pair(self, rng):
        for _ in range(100):
            a, b = rng.normal(0, 3, size=2)
            assert binary_choice_probability(a - b) == pytest.approx(
                logit_probabilities([a, b])[0], abs=1e-12)

    def test_strictly_increasing(self):
        grid = np.linspace(-30, 30, 301)
        values = [binary_choice_probability(x) for x in grid]
        assert np.all(np.diff(values) > 0)


class TestExpectedUtility:
    def test_hand_value(self):
        p = DiscreteProspect((-2.0, -1.0), (0.25, 0.75))
        assert expected_utility(p) == pytest.approx(-1.25, abs=1e-15)

    def test_degenerate(self):
        assert expected_utility(DiscreteProspect((3.25,), (1.0,))) == 3.25

    def test_truncated_poisson_against_direct_sum(self):
        p = truncated_poisson_pmf(4.0, 5, -5.0, -9.0)
        mpmath.mp.dps = 50
        rate = mpmath.mpf(4)
        terms = [rate ** k * mpmath.exp(-rate) / mpmath.factorial(k) for k in range(6)]
        z = sum(terms)
        oracle = sum(t / z * (mpmath.mpf(-5) - k * mpmath.mpf("0.8"))
                     for k, t in enumerate(terms))
        assert expected_utility(p) == pytest.approx(float(oracle), abs=1e-12)

    def test_linearity(self, rng):
        from conftest import random_prospect
        for _ in range(50):
            p = random_prospect(rng, max_n=10)
            a, c = rng.normal(), rng.normal()
            scaled = DiscreteProspect.from_outcomes(
                a * p.utility_array() + c, p.probability_array())
            assert expected_utility(scaled) == pytest.approx(
                a * expected_utility(p) + c, abs=1e-9)


class TestAcceptanceProbability:
    def test_even_odds(self):
        assert objective_acceptance_probability(0.0, 0.0) == 0.5

    def test_analytic(self):
        assert objective_acceptance_probability(-1.25, -1.0) == pytest.approx(
            1.0 / (1.0 + math.exp(0.25)))

    def test_equals_binary_choice(self, rng):
        for _ in range(100):
            a, b = rng.normal(0, 3, size=2)
            assert objective_acceptance_probability(a, b) == pytest.approx(
                binary_choice_probability(a - b), abs=1e-15)


class TestValueOfTime:
    # hourly willingness-to-pay figures from the random-coefficients fit
    REPORTED = {
        "a_walk": 67.8702,
        "a_wait": 13.1480,
        "a_ride_transit": 12.1703,
        "a_ride_uberx": 9.9466,
        "a_ride_srs": 21.5549,
    }

    def test_reported_values_within_one_percent(self, coeffs):
        computed = {
            "a_walk": value_of_time(coeffs.a_walk, coeffs.b),
            "a_wait": value_of_time(coeffs.a_wait, coeffs.b),
            "a_ride_transit": value_of_time(coeffs.a_ride[Mode.TRANSIT], coeffs.b),
            "a_ride_uberx": value_of_time(coeffs.a_ride[Mode.UBERX], coeffs.b),
            "a_ride_srs": value_of_time(coeffs.a_ride[Mode.SRS], coeffs.b),
        }
        for name, reported in self.REPORTED.items():
            assert computed[name] == pytest.approx(reported, rel=0.01)
            assert computed[name] > 0

    def test_unit_ratio(self):
        assert value_of_time(-0.25, -0.25) == pytest.approx(60.0)

    def test_zero_cost_coefficient(self):
        with pytest.raises(DomainError):
            value_of_time(-0.1, 0.0)
