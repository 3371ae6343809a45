import math

import numpy as np
import pytest

from berrynet.experiment import (
    PAIRS,
    FitError,
    SweepConfig,
    fit_fringe,
    fit_pair_fringes,
    relative_standard_error,
    residual_phase_amplitude,
    simulate_sweep,
    subtract_accidentals,
    theta_prime,
)

GRID_64 = tuple(np.linspace(0, 2 * np.pi, 64, endpoint=False))


def ideal_config(**overrides):
    base = dict(alpha_grid=GRID_64, pair_rate=1e6, singles_rate=4400, x=1.0, seed=2024)
    base.update(overrides)
    return SweepConfig(**base)


class TestSimulateSweep:
    def test_zero_rates_give_zero_counts(self):
        records = simulate_sweep(SweepConfig(alpha_grid=(0.0, 0.1, 0.2), seed=3))
        for rec in records:
            assert all(c == 0 for c in rec.pair_counts.values())
            assert all(int(v.sum()) == 0 for v in rec.singles_counts.values())

    def test_deterministic_for_fixed_seed(self):
        a = simulate_sweep(ideal_config())
        b = simulate_sweep(ideal_config())
        for ra, rb in zip(a, b):
            assert ra.pair_counts == rb.pair_counts
            for inp in ra.singles_counts:
                assert np.array_equal(ra.singles_counts[inp], rb.singles_counts[inp])

    def test_seed_changes_counts(self):
        a = simulate_sweep(ideal_config())
        b = simulate_sweep(ideal_config(seed=2025))
        assert any(ra.pair_counts != rb.pair_counts for ra, rb in zip(a, b))

    def test_empirical_conditionals_converge(self):
        # at pair_rate 1e6 the normalized fringe sits within 5/sqrt(rate)
        records = simulate_sweep(ideal_config())
        bound = 5.0 / math.sqrt(1e6)
        for rec in records:
            c01 = rec.pair_counts[(0, 1)]
            c02 = rec.pair_counts[(0, 2)]
            c03 = rec.pair_counts[(0, 3)]
            empirical = c01 / (c01 + c02 + c03)
            analytic = (1 + math.cos(theta_prime(rec.alpha))) / 2
            assert abs(empirical - analytic) < bound

    def test_suppressed_pairs_hold_only_accidentals(self):
        config = ideal_config(accidental_rate=50.0, pair_rate=1e5)
        records = simulate_sweep(config)
        for pair in ((0, 2), (1, 3)):
            counts = np.array([rec.pair_counts[pair] for rec in records], dtype=float)
            assert counts.mean() == pytest.approx(50.0, rel=0.15)
            # alpha independent: first and second half of the sweep agree
            assert counts[:32].mean() == pytest.approx(counts[32:].mean(), rel=0.2)

    def test_efficiencies_scale_counts(self):
        low = simulate_sweep(ideal_config(efficiencies=(0.5, 1.0, 1.0, 1.0), seed=5))
        full = simulate_sweep(ideal_config(seed=5))
        tot_low = sum(r.pair_counts[(0, 1)] for r in low)
        tot_full = sum(r.pair_counts[(0, 1)] for r in full)
        assert tot_low == pytest.approx(0.5 * tot_full, rel=0.02)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(alpha_grid=())
        with pytest.raises(ValueError):
            SweepConfig(alpha_grid=(0.0,), pair_rate=-1)
        with pytest.raises(ValueError):
            SweepConfig(alpha_grid=(0.0,), efficiencies=(0.0, 1, 1, 1))
        with pytest.raises(ValueError):
            SweepConfig(alpha_grid=(0.0,), x=1.2)


class TestSubtractAccidentals:
    def test_zero_rate_unchanged(self):
        records = simulate_sweep(ideal_config(accidental_rate=0.0))
        out = subtract_accidentals(records, 0.0)
        for a, b in zip(records, out):
            assert a.pair_counts == b.pair_counts

    def test_counts_equal_to_rate_go_to_zero(self):
        config = SweepConfig(alpha_grid=GRID_64, accidental_rate=40.0, seed=8)
        records = simulate_sweep(config)
        for rec in records:  # pin counts exactly at the background level
            for pair in rec.pair_counts:
                rec.pair_counts[pair] = 40.0
        out = subtract_accidentals(records, 40.0)
        assert all(c == 0.0 for rec in out for c in rec.pair_counts.values())

    def test_flooring_bias_stays_below_shot_noise(self):
        config = SweepConfig(alpha_grid=GRID_64, accidental_rate=40.0, seed=8)
        out = subtract_accidentals(simulate_sweep(config), 40.0)
        means = np.array([rec.pair_counts[(0, 1)] for rec in out])
        # flooring at zero leaves only the positive-part bias, ~sigma/sqrt(2 pi)
        assert 0.0 <= means.mean() <= math.sqrt(40.0)

    def test_subtraction_raises_visibility(self):
        config = ideal_config(x=0.9, accidental_rate=2e4)
        records = simulate_sweep(config)
        raw_fit = fit_pair_fringes(records)[(0, 1)]
        sub_fit = fit_pair_fringes(subtract_accidentals(records, 2e4))[(0, 1)]
        assert sub_fit.visibility > raw_fit.visibility

    def test_equivalent_to_offset_shift_without_flooring(self):
        theta = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        values = 100.0 + 30.0 * np.cos(theta)
        fit_shifted = fit_fringe(list(zip(theta, values - 20.0)))
        fit_raw = fit_fringe(list(zip(theta, values)))
        assert fit_shifted.offset == pytest.approx(fit_raw.offset - 20.0, abs=1e-9)
        assert fit_shifted.amplitude == pytest.approx(fit_raw.amplitude, abs=1e-9)


class TestFitFringe:
    def test_exact_recovery(self):
        theta = np.linspace(0, 2 * np.pi, 40, endpoint=False)
        values = 4.0 + 2.0 * np.cos(theta + 0.3)
        fit = fit_fringe(list(zip(theta, values)))
        assert fit.offset == pytest.approx(4.0, abs=1e-9)
        assert fit.amplitude == pytest.approx(2.0, abs=1e-9)
        assert fit.phase0 == pytest.approx(0.3, abs=1e-9)
        assert fit.visibility == pytest.approx(0.5, abs=1e-9)

    def test_ideal_conditional_has_unit_visibility(self):
        theta = np.linspace(0, 2 * np.pi, 48, endpoint=False)
        values = (1 + np.cos(theta)) / 2
        fit = fit_fringe(list(zip(theta, values)))
        assert fit.visibility == pytest.approx(1.0, abs=1e-9)
        assert abs(fit.phase0) <= 1e-9

    @pytest.mark.parametrize("x", [0.0, 0.5, 0.94, 1.0])
    def test_visibility_equals_overlap(self, x):
        theta = np.linspace(0, 2 * np.pi, 48, endpoint=False)
        values = (1 + x * np.cos(theta)) / 8
        fit = fit_fringe(list(zip(theta, values)))
        assert fit.visibility == pytest.approx(x, abs=1e-6)

    def test_extrema_sit_at_zero_and_pi(self):
        theta = np.linspace(0, 2 * np.pi, 48, endpoint=False)
        falling = (1 - np.cos(theta)) / 2
        fit = fit_fringe(list(zip(theta, falling)))
        assert abs(abs(fit.phase0) - np.pi) <= 1e-9

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_fringe([(0.0, 1.0), (1.0, 2.0), (2.0, 1.0)])

    def test_narrow_span(self):
        theta = np.linspace(0, 2.5, 12)
        with pytest.raises(FitError):
            fit_fringe(list(zip(theta, np.cos(theta))))

    def test_all_zero_trace(self):
        theta = np.linspace(0, 2 * np.pi, 12, endpoint=False)
        with pytest.raises(FitError):
            fit_fringe(list(zip(theta, np.zeros_like(theta))))


class TestRelativeStandardError:
    def test_constant_series(self):
        assert relative_standard_error([7.0] * 10) == 0.0

    def test_poisson_scaling(self):
        for seed, mean in ((1, 400.0), (2, 2500.0)):
            rng = np.random.default_rng(seed)
            values = rng.poisson(mean, size=400)
            rse = relative_standard_error(values)
            expected = 1.0 / math.sqrt(mean)
            assert expected / 2 <= rse <= expected * 2

    def test_shot_noise_at_1100(self):
        records = simulate_sweep(ideal_config())
        rses = [
            relative_standard_error([rec.singles_counts[inp][det] for rec in records])
            for inp in (0, 1)
            for det in range(4)
        ]
        assert 0.02 <= float(np.mean(rses)) <= 0.04

    def test_zero_mean_rejected(self):
        with pytest.raises(ValueError):
            relative_standard_error([0.0, 0.0, 0.0])


class TestResidualPhaseAmplitude:
    def test_ideal_suppressed_pair_is_flat(self):
        config = ideal_config(pair_rate=2e6, accidental_rate=1e4, seed=9)
        records = simulate_sweep(config)
        assert residual_phase_amplitude(records, (0, 2)) < 0.005

    def test_recovers_injected_efficiency_drift(self):
        config = ideal_config(
            pair_rate=2e6,
            accidental_rate=1e4,
            seed=9,
            efficiency_drift={0: (0.01, 0.0)},
        )
        records = simulate_sweep(config)
        recovered = residual_phase_amplitude(records, (0, 2))
        assert recovered == pytest.approx(0.01, abs=0.004)

    def test_zero_counts_surface_fit_error(self):
        records = simulate_sweep(SweepConfig(alpha_grid=GRID_64, seed=1))
        with pytest.raises(FitError):
            residual_phase_amplitude(records, (0, 2))


class TestFitPairFringes:
    def test_live_and_suppressed_split(self):
        records = simulate_sweep(ideal_config())
        fits = fit_pair_fringes(records)
        for pair in ((0, 1), (0, 3), (1, 2), (2, 3)):
            assert fits[pair].visibility == pytest.approx(1.0, abs=0.01)
        for pair in ((0, 2), (1, 3)):
            assert fits[pair] is None  # exactly suppressed, all-zero trace

    def test_pair_order_matches_schema(self):
        assert PAIRS == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
