import math

import numpy as np
import pytest

from randucb.bounds import (
    glb_minimax_bound,
    linear_minimax_bound,
    mab_gap_bound,
    mab_minimax_bound,
)
from randucb.zdist import make_gaussian_zdist, make_point_zdist, make_two_point_zdist


def default_z(T):
    return make_gaussian_zdist(0.0, 2.0 * math.sqrt(math.log(T)), 20, 1e-7, 0.125)


def tail(z, c):
    return sum(p for a, p in zip(z.alphas, z.probs) if a > c)


def abs_tail(z, c):
    return sum(p for a, p in zip(z.alphas, z.probs) if abs(a) > c)


class TestMabMinimax:
    def test_constants_for_the_reference_configuration(self):
        K, T = 100, 20000
        report = mab_minimax_bound(K, T, default_z(T))
        assert report.c1 == pytest.approx(1 + math.sqrt(math.log(K * T**2)), rel=1e-12)
        assert report.c1 == pytest.approx(5.9409, abs=1e-3)
        assert report.c3 == pytest.approx(2 * K * math.log(1 + T / K), rel=1e-12)
        assert report.c3 == pytest.approx(1060.63, abs=0.5)

    def test_value_assembles_from_reported_components(self):
        K, T = 50, 5000
        z = make_gaussian_zdist(0.0, 2.0 * math.sqrt(math.log(T)), 20, 0.05, 0.125)
        r = mab_minimax_bound(K, T, z)
        assert r.applicable
        assembled = ((r.c1 + r.c2) * (1 + 2 / (r.tail_hi - r.tail_abs))
                     * math.sqrt(r.c3 * T) + T * r.tail_abs + r.extra)
        assert r.value == pytest.approx(assembled, rel=1e-9)
        assert r.extra == K + 1

    def test_default_c2_zeroes_the_far_tail(self):
        T = 20000
        z = default_z(T)
        r = mab_minimax_bound(100, T, z)
        assert r.applicable
        assert z.upper > r.c1
        assert r.tail_abs == 0.0
        assert r.c2 == z.upper

    def test_tails_match_summation_oracle(self):
        T = 5000
        z = make_gaussian_zdist(0.0, 2.0 * math.sqrt(math.log(T)), 20, 0.05, 0.125)
        r = mab_minimax_bound(10, T, z, c2=5.0)
        assert r.tail_hi == pytest.approx(tail(z, r.c1), rel=1e-15)
        assert r.tail_abs == pytest.approx(abs_tail(z, 5.0), rel=1e-15)

    def test_point_mass_below_c1_is_not_applicable(self):
        T = 20000
        r = mab_minimax_bound(100, T, make_point_zdist(2.0))
        assert not r.applicable
        assert r.value == math.inf
        assert r.reason

    def test_c2_not_above_c1_is_not_applicable(self):
        T = 20000
        r = mab_minimax_bound(100, T, default_z(T), c2=1.0)
        assert not r.applicable

    def test_monotone_in_horizon(self):
        # one wide fixed grid so every horizon in the scan stays applicable
        z = make_gaussian_zdist(0.0, 8.0, 20, 0.05, 0.125)
        values = [mab_minimax_bound(10, T, z).value for T in (100, 1000, 10000)]
        assert values[0] <= values[1] <= values[2]
        assert all(v >= 0 for v in values)


class TestMabGap:
    def test_all_zero_gaps_reduce_to_arm_count(self):
        z = make_two_point_zdist(0.1, 100)
        r = mab_gap_bound([0.0, 0.0, 0.0], z, 100, 3)
        assert r.value == 3.0

    def test_single_point_distribution_closed_form(self):
        beta = 1.5
        T, K = 1000, 2
        r = mab_gap_bound([0.0, 0.5], make_point_zdist(beta), T, K)
        per_round = T * math.exp(-2 * beta**2) + 4 + 3 * beta**2
        assert r.value == pytest.approx(K + per_round * 12.0, rel=1e-12)

    def test_value_matches_direct_series_oracle(self):
        T, K = 2000, 5
        z = make_gaussian_zdist(0.0, 2.0 * math.sqrt(math.log(T)), 10, 0.05, 0.25)
        gaps = [0.0, 0.1, 0.2, 0.3, 0.4]
        r = mab_gap_bound(gaps, z, T, K)
        series = 0.0
        for n in range(1, z.m):
            prefix = float(z.probs[:n].sum())
            suffix = float(z.probs[n:].sum())
            series += (prefix / suffix) * math.exp(-2 * z.alphas[n - 1] ** 2)
        per_round = series + T * math.exp(-2 * z.alphas[-1] ** 2) + 4 + 3 * z.alphas[-1] ** 2
        gap_sum = sum(6 / g for g in gaps if g > 0)
        assert r.value == pytest.approx(K + per_round * gap_sum, rel=1e-9)

    def test_crude_variant_dominates_the_tight_one(self):
        T, K = 2000, 4
        z = make_gaussian_zdist(0.0, 3.0, 15, 0.05, 0.3)
        r = mab_gap_bound([0.0, 0.2, 0.3, 0.5], z, T, K)
        assert r.aux["crude_value"] >= r.value

    def test_gap_permutation_invariance(self):
        T, K = 500, 4
        z = make_two_point_zdist(0.2, T)
        a = mab_gap_bound([0.0, 0.1, 0.3, 0.2], z, T, K)
        b = mab_gap_bound([0.3, 0.0, 0.2, 0.1], z, T, K)
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_tiny_top_mass_is_not_applicable(self):
        T = 5000
        r = mab_gap_bound([0.0, 0.2], default_z(T), T, 2)
        assert not r.applicable

    def test_negative_support_is_not_applicable(self):
        z = make_gaussian_zdist(-1.0, 1.0, 6, 0.3, 0.5)
        assert not mab_gap_bound([0.0, 0.2], z, 100, 2).applicable

    def test_input_contracts(self):
        z = make_two_point_zdist(0.2, 100)
        with pytest.raises(ValueError):
            mab_gap_bound([0.0, 0.1, 0.2], z, 100, 2)
        with pytest.raises(ValueError):
            mab_gap_bound([0.1, 0.2], z, 100, 2)
        with pytest.raises(ValueError):
            mab_gap_bound([0.0, -0.1], z, 100, 2)


class TestLinearMinimax:
    def test_constants_for_the_reference_configuration(self):
        d, T, lam = 5, 5000, 1e-4
        z = make_gaussian_zdist(0.0, 20.0, 20, 0.05, 0.125)
        r = linear_minimax_bound(d, T, lam, z)
        expected_c1 = math.sqrt(lam) + 0.5 * math.sqrt(d * math.log(T + T**2 / (d * lam)))
        assert r.c1 == pytest.approx(expected_c1, rel=1e-12)
        assert r.c1 == pytest.approx(5.559, abs=2e-3)
        assert r.c3 == pytest.approx(2 * d * math.log(1 + T / (d * lam)), rel=1e-12)

    def test_value_assembles_from_reported_components(self):
        d, T, lam = 4, 2000, 1e-2
        z = make_gaussian_zdist(0.0, 18.0, 20, 0.05, 0.125)
        r = linear_minimax_bound(d, T, lam, z)
        assert r.applicable
        assembled = ((r.c1 + r.c2) * (1 + 2 / (r.tail_hi - r.tail_abs))
                     * math.sqrt(r.c3 * T) + T * r.tail_abs + 1.0)
        assert r.value == pytest.approx(assembled, rel=1e-9)

    def test_three_c1_upper_keeps_optimism_probability_positive(self):
        d, T, lam = 5, 5000, 1e-4
        c1 = math.sqrt(lam) + 0.5 * math.sqrt(d * math.log(T + T**2 / (d * lam)))
        z = make_gaussian_zdist(0.0, 3 * c1, 20, 1e-7, 0.125)
        r = linear_minimax_bound(d, T, lam, z)
        assert r.applicable
        assert r.tail_hi >= 1e-7
        assert r.tail_abs == 0.0

    def test_zero_horizon_leaves_only_the_constant(self):
        z = make_point_zdist(1.0)
        r = linear_minimax_bound(5, 0, 1e-4, z)
        assert r.value == 1.0

    def test_monotone_in_horizon(self):
        d, lam = 3, 1e-2
        values = []
        for T in (100, 1000, 10000):
            c1 = math.sqrt(lam) + 0.5 * math.sqrt(d * math.log(T + T**2 / (d * lam)))
            z = make_gaussian_zdist(0.0, 3 * c1, 20, 0.05, 0.125)
            values.append(linear_minimax_bound(d, T, lam, z).value)
        assert values[0] <= values[1] <= values[2]


class TestGlbMinimax:
    def test_constants_for_the_reference_configuration(self):
        d, T, mu = 5, 5000, 0.105
        lip, rho = 0.25, 0.4
        c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / (2 * mu)
        z = make_gaussian_zdist(0.0, 2 * math.sqrt(lip) * c1, 20, 0.05, 0.125)
        r = glb_minimax_bound(d, T, mu, lip, rho, z)
        assert r.c1 == pytest.approx(c1, rel=1e-12)
        assert r.c1 == pytest.approx(34.198, abs=5e-3)
        assert r.c3 == pytest.approx(2 * d * math.log(1 + T / d), rel=1e-12)
        tau = d + max((d**2 * math.log(T / d) + 2 * d * math.log(T)) / (mu**2 * rho), d / rho)
        assert r.aux["tau"] == pytest.approx(tau, rel=1e-12)

    def test_value_assembles_from_reported_components(self):
        d, T, mu, lip, rho = 4, 3000, 0.2, 0.25, 0.5
        c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / (2 * mu)
        z = make_gaussian_zdist(0.0, 2 * math.sqrt(lip) * c1, 20, 0.05, 0.125)
        r = glb_minimax_bound(d, T, mu, lip, rho, z)
        assert r.applicable
        assembled = ((r.c1 + r.c2 / math.sqrt(mu)) * (1 + 2 / (r.tail_hi - r.tail_abs))
                     * lip * math.sqrt(r.c3 * T) + T * r.tail_abs + r.extra)
        assert r.value == pytest.approx(assembled, rel=1e-9)

    def test_optimism_threshold_scales_with_sqrt_lipschitz(self):
        d, T, mu, lip, rho = 4, 3000, 0.2, 0.25, 0.5
        c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / (2 * mu)
        z = make_gaussian_zdist(0.0, 2 * math.sqrt(lip) * c1, 20, 0.05, 0.125)
        r = glb_minimax_bound(d, T, mu, lip, rho, z)
        assert r.aux["threshold"] == pytest.approx(math.sqrt(lip) * c1, rel=1e-12)
        assert r.tail_hi == pytest.approx(tail(z, math.sqrt(lip) * c1), rel=1e-15)

    def test_identity_link_reduces_toward_the_linear_shape(self):
        d, T, rho = 3, 2000, 0.5
        mu = lip = 1.0
        c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / 2
        z = make_gaussian_zdist(0.0, 3 * c1, 20, 0.05, 0.125)
        r = glb_minimax_bound(d, T, mu, lip, rho, z)
        assert r.applicable
        main = (r.c1 + r.c2) * (1 + 2 / (r.tail_hi - r.tail_abs)) * math.sqrt(r.c3 * T)
        assert r.value == pytest.approx(main + r.extra, rel=1e-9)

    def test_tiny_rho_makes_initialization_dominate(self):
        d, T, mu, lip = 5, 5000, 0.105, 0.25
        c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / (2 * mu)
        z = make_gaussian_zdist(0.0, 2 * math.sqrt(lip) * c1, 20, 0.05, 0.125)
        r = glb_minimax_bound(d, T, mu, lip, 1e-6, z)
        assert r.aux["tau"] / r.value > 0.99

    def test_monotone_in_horizon(self):
        d, mu, lip, rho = 3, 0.105, 0.25, 0.4
        values = []
        for T in (100, 1000, 10000):
            c1 = math.sqrt(d * math.log(T / d) + 2 * math.log(T)) / (2 * mu)
            z = make_gaussian_zdist(0.0, 2 * math.sqrt(lip) * c1, 20, 0.05, 0.125)
            values.append(glb_minimax_bound(d, T, mu, lip, rho, z).value)
        assert values[0] <= values[1] <= values[2]


class TestReportShape:
    def test_as_dict_flattens_fields_and_aux(self):
        r = mab_minimax_bound(10, 1000, make_gaussian_zdist(0.0, 6.0, 20, 0.05, 0.125))
        d = r.as_dict()
        assert set(d) >= {"value", "c1", "c2", "c3", "tail_hi", "tail_abs", "extra",
                          "applicable"}

    def test_inapplicable_reports_carry_reasons_not_exceptions(self):
        r = mab_minimax_bound(10, 1000, make_point_zdist(0.5))
        assert not r.applicable and isinstance(r.reason, str)
