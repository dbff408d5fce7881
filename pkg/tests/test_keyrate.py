import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from gaussqkd.channels import IDENTITY_CHANNEL, ChannelParams
from gaussqkd.exceptions import ParameterError
from gaussqkd.keyrate import (
    Bounds,
    g_entropy,
    holevo_x2_E,
    key_rate,
    mutual_information,
    noise_threshold,
    optimize_rate,
)
from gaussqkd.protocols import TwoWayParams, build_floodlight, build_one_way, build_two_way, FloodlightParams

REF = TwoWayParams(4.0, 4.0, 0.5, 1.2)  # v = v' = 3
REF_CH = ChannelParams(0.9, 0.05)


class TestEntropy:
    def test_exact_values(self):
        assert g_entropy(1.0) == 0.0
        assert g_entropy(3.0) == 2.0

    def test_g5(self):
        assert g_entropy(5.0) == pytest.approx(3 * math.log2(3) - 2, rel=1e-14)

    def test_array_input(self):
        out = g_entropy(np.array([1.0, 3.0, 5.0]))
        assert out.shape == (3,)
        assert np.allclose(out, [oracles.entropy_g(x) for x in (1.0, 3.0, 5.0)])

    def test_monotone(self):
        x = np.linspace(1, 50, 100)
        assert np.all(np.diff(g_entropy(x)) > 0)

    @pytest.mark.parametrize("x", [0.999, np.nan])
    def test_domain(self, x):
        with pytest.raises(ParameterError):
            g_entropy(x)


class TestHolevoAndInformation:
    def test_pure_channel_has_no_leak(self):
        state = build_two_way(TwoWayParams(20, 10, 0.4, 3), IDENTITY_CHANNEL)
        assert abs(holevo_x2_E(state)) < 1e-8

    def test_vacuum_circuit(self):
        # pure loss keeps every mode in vacuum
        state = build_two_way(TwoWayParams(1, 1, 0.5, 1), ChannelParams(0.6, 0.0))
        assert abs(holevo_x2_E(state)) < 1e-10
        assert mutual_information(state) == pytest.approx(0.0, abs=1e-10)

    def test_reference_point_matches_closed_form(self):
        info, chi, k = oracles.two_way_rate_from_closed_form(4, 4, 0.5, 1.2, 0.9, 0.05)
        report = key_rate(build_two_way(REF, REF_CH))
        assert report.mutual_info == pytest.approx(info, abs=1e-10)
        assert report.holevo == pytest.approx(chi, abs=1e-10)
        assert report.raw_rate == pytest.approx(k, abs=1e-10)

    def test_total_loss_decouples(self):
        state = build_two_way(TwoWayParams(5, 5, 0.5, 1), ChannelParams(0.0))
        assert mutual_information(state) == pytest.approx(0.0, abs=1e-10)

    def test_rescaling_a_variable_leaves_information(self):
        from gaussqkd.keyrate import _gaussian_mi
        from gaussqkd.states import outcome_covariance

        cov = outcome_covariance(build_two_way(REF, REF_CH).gamma)
        scale = np.ones(8)
        scale[6:8] = 0.37
        rescaled = cov * np.outer(scale, scale)
        key, side = [2, 3], [4, 5, 6, 7]
        assert _gaussian_mi(rescaled, key, side) == pytest.approx(_gaussian_mi(cov, key, side), abs=1e-12)

    def test_floodlight_has_no_raw_key(self):
        with pytest.raises(ParameterError):
            key_rate(build_floodlight(FloodlightParams(), ChannelParams(0.5)))


class TestKeyRate:
    def test_pure_channel_rate_is_half_information(self):
        report = key_rate(build_two_way(TwoWayParams(10, 10, 0.5, 2), IDENTITY_CHANNEL))
        assert report.key_rate == pytest.approx(0.5 * report.mutual_info, abs=1e-8)
        assert report.key_rate > 0

    def test_clamped_at_zero(self):
        report = key_rate(build_two_way(TwoWayParams(10, 10, 0.5, 2), ChannelParams(0.3, 0.8)))
        assert report.raw_rate < 0
        assert report.key_rate == 0.0

    def test_one_way_matches_standalone_calculator(self):
        report = key_rate(build_one_way(3.0, ChannelParams(0.5, 0.0)))
        assert report.key_rate == pytest.approx(oracles.one_way_rate(3.0, 0.5, 0.0)[2], abs=1e-12)

    def test_beta_override_and_report_fields(self):
        state = build_two_way(REF, REF_CH)
        report = key_rate(state, beta=0.9)
        assert report.params_used.beta == 0.9
        assert len(report.symplectic_spectrum_full) == 4
        assert len(report.symplectic_spectrum_conditional) == 3
        assert report.channel == REF_CH
        with pytest.raises(ParameterError):
            key_rate(state, beta=1.5)

    def test_one_way_increasing_in_vb(self):
        vbs = np.linspace(1.01, 20, 40)
        rates = [key_rate(build_one_way(v, IDENTITY_CHANNEL)).key_rate for v in vbs]
        assert rates[0] > 0
        assert np.all(np.diff(rates) > 0)


@given(
    VA=st.floats(1, 100), VB=st.floats(1, 100), T=st.floats(0, 1), g=st.floats(1, 20),
    tau=st.floats(0.01, 1), xi=st.floats(0, 1),
)
def test_information_quantities_nonnegative_and_match_oracle(VA, VB, T, g, tau, xi):
    report = key_rate(build_two_way(TwoWayParams(VA, VB, T, g), ChannelParams(tau, xi)))
    assert report.mutual_info >= -1e-10
    assert report.holevo >= -1e-8
    info, chi, k = oracles.two_way_rate_from_closed_form(VA, VB, T, g, tau, xi)
    assert report.mutual_info == pytest.approx(info, abs=1e-8)
    assert report.holevo == pytest.approx(chi, abs=1e-8)


@given(
    VA=st.floats(1, 50), VB=st.floats(1, 50), T=st.floats(0, 1), g=st.floats(1, 10),
    tau=st.floats(0.05, 0.99),
)
def test_rate_non_increasing_in_noise(VA, VB, T, g, tau):
    p = TwoWayParams(VA, VB, T, g)
    rates = [key_rate(build_two_way(p, ChannelParams(tau, xi))).raw_rate for xi in np.linspace(0, 1, 11)]
    assert np.all(np.diff(rates) <= 1e-9)


class TestOptimizer:
    def test_stays_within_bounds(self):
        bounds = Bounds(V_max=30, g_max=5, T_min=0.2, T_max=0.8)
        res = optimize_rate(ChannelParams(0.8, 0.05), bounds=bounds, budget=600)
        assert bounds.contains(res.params)
        assert res.evaluations <= 601

    def test_one_dimensional_optimum_beats_grid(self):
        fixed = {"V_A": 20.0, "V_B": 10.0, "g": 2.0}
        res = optimize_rate(ChannelParams(0.7, 0.02), fixed=fixed, budget=200)
        grid = np.linspace(0, 1, 1001)
        scan = [
            key_rate(build_two_way(TwoWayParams(20, 10, t, 2), ChannelParams(0.7, 0.02))).raw_rate
            for t in grid
        ]
        best = int(np.argmax(scan))
        assert res.report.raw_rate >= scan[best] - 1e-9
        assert abs(res.params.T - grid[best]) <= 2e-3

    def test_one_way_optimum_matches_grid(self):
        bounds = Bounds(V_max=50)
        res = optimize_rate(ChannelParams(0.6, 0.05), protocol="one-way", bounds=bounds, budget=200)
        scan = max(oracles.one_way_rate(v, 0.6, 0.05)[2] for v in np.linspace(1, 50, 2000))
        assert res.report.raw_rate >= scan - 1e-9

    def test_all_fixed_is_plain_evaluation(self):
        fixed = {"V_A": 3.0, "V_B": 2.0, "T": 0.4, "g": 1.5}
        res = optimize_rate(REF_CH, fixed=fixed)
        direct = key_rate(build_two_way(TwoWayParams(3, 2, 0.4, 1.5), REF_CH))
        assert res.report.raw_rate == direct.raw_rate

    def test_deterministic(self):
        a = optimize_rate(ChannelParams(0.8, 0.05), budget=400, seed=3)
        b = optimize_rate(ChannelParams(0.8, 0.05), budget=400, seed=3)
        assert a.params == b.params

    @pytest.mark.parametrize(
        "kwargs",
        [dict(protocol="three-way"), dict(fixed={"h": 1.0}), dict(budget=0), dict(protocol="one-way", fixed={"g": 2.0})],
    )
    def test_bad_arguments(self, kwargs):
        with pytest.raises(ParameterError):
            optimize_rate(REF_CH, **kwargs)


class TestThreshold:
    def test_bisection_contract_one_way(self):
        bounds = Bounds(V_max=100)
        res = noise_threshold(0.6, bounds=bounds, tol=1e-3, protocol="one-way", budget=100)
        below = optimize_rate(ChannelParams(0.6, res.xi_max - 2e-3), protocol="one-way", bounds=bounds, budget=100)
        above = optimize_rate(ChannelParams(0.6, res.xi_max + 2e-3), protocol="one-way", bounds=bounds, budget=100)
        assert below.report.key_rate > 0
        assert above.report.key_rate == 0

    def test_one_way_threshold_decreases_with_loss(self):
        xs = [noise_threshold(t, protocol="one-way", budget=100, tol=1e-3).xi_max for t in (0.9, 0.7, 0.5, 0.3)]
        assert all(a >= b for a, b in zip(xs, xs[1:]))

    def test_tolerance_respected(self):
        coarse = noise_threshold(0.5, protocol="one-way", budget=100, tol=1e-2).xi_max
        fine = noise_threshold(0.5, protocol="one-way", budget=100, tol=1e-3).xi_max
        assert abs(coarse - fine) < 1e-2

    def test_validation(self):
        with pytest.raises(ParameterError):
            noise_threshold(0.0)
        with pytest.raises(ParameterError):
            noise_threshold(0.5, tol=0)
