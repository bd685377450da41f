"""
test_estimation.py
==================

Unit tests for figures of merit, lifetime fits, sweeps and the readout
mode optimization.

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import replace

import numpy as np
import pytest

from estimation.figures import (
    atomic_noise_pn_units,
    conditional_residuals,
    displacement_calibration,
    epr_criterion,
    kappa_from_displacement,
    noise_budget,
    sensitivity,
    sensitivity_report,
    snr,
    snr_from_moments,
    to_shot_noise_units,
)
from estimation.fitting import fit_exponential_lifetime
from estimation.optimize import optimize_mode_gamma
from estimation.readout import (
    analyze_analytic,
    analyze_monte_carlo,
    corrected_readout,
    rf_calibrated_kappa,
)
from estimation.sweeps import run_sweep, with_sweep_value
from magnetometer.channels import Y_PLUS, Z_PLUS
from magnetometer.config import SweepSpec
from magnetometer.physics import coupling_constant, pn_limited_sensitivity, rf_displacement
from protocol.monte_carlo import monte_carlo
from protocol.sequences import run_entanglement_protocol


class TestSNRAndSensitivity:
    """Test SNR and sensitivity formulas."""

    def test_snr_example(self):
        """Test shift 2 over standard deviation sqrt(2)."""
        result = snr(np.array([1.0, 3.0]), np.array([-1.0, 1.0]))

        assert result.value == pytest.approx(np.sqrt(2))
        assert result.pooled_value == pytest.approx(np.sqrt(2))
        assert result.stderr > 0

    def test_snr_sampled(self, rng):
        """Test SNR of Gaussian ensembles with shift 3 and unit noise."""
        signal = rng.normal(3.0, 1.0, 5000)
        reference = rng.normal(0.0, 1.0, 5000)

        result = snr(signal, reference)

        assert result.value == pytest.approx(3.0, abs=3 * result.stderr)

    def test_snr_needs_two_shots(self):
        """Test that single-shot ensembles are rejected."""
        with pytest.raises(ValueError, match="two shots"):
            snr(np.array([1.0]), np.array([0.0, 1.0]))

    def test_snr_zero_variance(self):
        """Test that a constant signal is rejected."""
        with pytest.raises(ValueError, match="zero variance"):
            snr(np.array([1.0, 1.0]), np.array([0.0, 1.0]))

    def test_snr_from_moments(self):
        """Test |shift| / sqrt(variance)."""
        assert snr_from_moments(-3.0, 4.0) == pytest.approx(1.5)
        with pytest.raises(ValueError):
            snr_from_moments(1.0, 0.0)

    def test_sensitivity_over_rf_pulse(self):
        """Test B sqrt(tau) / SNR for the 15 ms pulse."""
        assert sensitivity(36e-15, 12.247, 15e-3) == pytest.approx(3.6e-16, rel=1e-3)

    def test_sensitivity_over_cycle(self):
        """Test 4.2e-16 T/sqrt(Hz) for SNR 14.7 over a 29.5 ms cycle."""
        assert sensitivity(36e-15, 14.7, 0.0295) == pytest.approx(4.2e-16, rel=0.01)

    def test_sensitivity_rejects_zero_snr(self):
        """Test that SNR 0 raises ValueError."""
        with pytest.raises(ValueError):
            sensitivity(36e-15, 0.0, 15e-3)

    def test_report(self):
        """Test the combined sensitivity report."""
        report = sensitivity_report(36e-15, 14.7, 15e-3, 0.0295)

        assert report.b_min == pytest.approx(36e-15 / 14.7)
        assert report.bandwidth == pytest.approx(0.88 / 15e-3)
        assert report.sensitivity_cycle > report.sensitivity_tau

    def test_report_rejects_short_cycle(self):
        """Test that a cycle shorter than the RF pulse is rejected."""
        with pytest.raises(ValueError, match="shorter"):
            sensitivity_report(36e-15, 14.7, 15e-3, 10e-3)


class TestNoiseBudget:
    """Test the readout noise decomposition."""

    def test_epr_criterion(self):
        """Test 1 for coherent states and 0.5 for halved variances."""
        assert epr_criterion(0.5, 0.5) == pytest.approx(1.0)
        assert epr_criterion(0.25, 0.25) == pytest.approx(0.5)

    def test_simplified_budget(self):
        """Test atomic = (total - 0.5) / kappa^2."""
        budget = noise_budget(3.6078, 3.1)

        assert budget.atomic_pn_units == pytest.approx((3.6078 - 0.5) / 3.1)
        assert budget.light_contribution == 0.5
        assert budget.atomic_pn_units_exact is None

    def test_exact_budget_for_coherent_atoms(self):
        """Test that t^2 + kappa^2 with unit detection is one PN unit."""
        kappa_sq = coupling_constant(112.9, 3e-3, 1 / 6.3) ** 2
        total = 1 - kappa_sq / 6.3 + kappa_sq

        budget = noise_budget(total, kappa_sq, xi_squared=1 / 6.3)

        assert total == pytest.approx(3.6078, rel=1e-3)
        assert budget.atomic_pn_units_exact == pytest.approx(1.0, rel=1e-12)

    def test_exact_inversion(self):
        """Test that the exact model inverts its own forward map."""
        kappa_sq, xi_sq, eta, atomic = 3.1, 1 / 6.3, 0.8, 0.7
        total = (1 - eta) + eta * (1 - xi_sq * kappa_sq + kappa_sq * atomic)

        assert atomic_noise_pn_units(total, kappa_sq, xi_sq, eta) == pytest.approx(atomic)

    def test_small_total_clipped(self):
        """Test that a total within three standard errors below 0.5 clips to zero."""
        budget = noise_budget(0.45, 3.1, stderr=0.05)

        assert budget.atomic_pn_units == 0.0

    def test_total_below_light_rejected(self):
        """Test that a total far below the light noise raises ValueError."""
        with pytest.raises(ValueError, match="below the light noise"):
            noise_budget(0.3, 3.1)

    def test_zero_kappa_rejected(self):
        """Test that kappa^2 = 0 raises ValueError."""
        with pytest.raises(ValueError):
            noise_budget(1.0, 0.0)

    def test_ideal_pn_readout(self, ideal):
        """Test a 3.6 SNU readout carrying exactly one PN unit of atomic noise."""
        point = analyze_analytic(ideal, "pn")

        assert point.readout_variance_snu == pytest.approx(3.6, rel=0.05)
        assert point.atomic_noise_pn == pytest.approx(1.0, rel=1e-9)


class TestDisplacementCalibration:
    """Test the conversion of Stokes means to spin displacements."""

    def test_recovers_field_ratio(self, baseline):
        """Test that the inferred displacement is B_RF/B_min PN deviations."""
        probe = baseline.probe2
        kappa = coupling_constant(baseline.ensemble.gamma_swap, probe.duration, probe.xi_squared)
        d = rf_displacement(baseline.rf, baseline.ensemble, baseline.constants)
        mean_photon_units = kappa * np.sqrt(probe.eta_detection) * d.z * np.sqrt(probe.photon_number)

        result = displacement_calibration(
            mean_photon_units, 0.0, kappa, probe.eta_detection, probe.photon_number,
            baseline.constants.spin, baseline.ensemble.n_total,
        )

        limit = pn_limited_sensitivity(baseline.ensemble, baseline.rf.duration, baseline.constants)
        assert result.pn_z == pytest.approx(baseline.rf.amplitude / limit.b_min, rel=1e-9)
        assert result.pn_y == 0.0

    def test_zero_coupling_rejected(self):
        """Test that kappa = 0 raises ValueError."""
        with pytest.raises(ValueError, match="zero coupling"):
            displacement_calibration(1.0, 0.0, 0.0, 0.8, 1e14, 4.0, 1.44e12)

    def test_kappa_from_displacement(self):
        """Test kappa recovered from the shift of a known displacement."""
        shift = np.sqrt(0.8) * 2.0 * 3.0 * np.sqrt(0.5)

        assert kappa_from_displacement(shift, 3.0, 0.8) == pytest.approx(2.0)
        assert kappa_from_displacement(-shift, -3.0, 0.8) == pytest.approx(2.0)

    def test_kappa_from_displacement_rejects_bad_input(self):
        """Test zero displacement and out-of-range efficiency."""
        with pytest.raises(ValueError, match="zero displacement"):
            kappa_from_displacement(1.0, 0.0)
        with pytest.raises(ValueError, match="eta"):
            kappa_from_displacement(1.0, 2.0, eta=0.0)

    def test_rf_kappa_matches_model(self, baseline):
        """Test that without extra decoherence the RF readout gives the model kappa."""
        config = replace(baseline, ensemble=replace(baseline.ensemble, gamma_extra=0.0))

        for pulse_id in ("probe1", "probe2"):
            result = rf_calibrated_kappa(config, pulse_id)

            assert result["kappa_squared"] == pytest.approx(result["kappa_squared_model"], rel=1e-9)
            probe = getattr(config, pulse_id)
            assert result["pn_level_snu"] == pytest.approx(probe.eta_detection * result["kappa_squared"])

    def test_rf_kappa_with_extra_decoherence(self, baseline):
        """Test that decay during the pulse lowers the inferred kappa."""
        result = rf_calibrated_kappa(baseline, "probe2")

        assert 0 < result["kappa_squared"] < result["kappa_squared_model"]
        d = rf_displacement(baseline.rf, baseline.ensemble, baseline.constants)
        assert result["displacement_pn"] == pytest.approx(d.magnitude / np.sqrt(0.5))

    def test_rf_kappa_unknown_pulse(self, baseline):
        """Test that only the two readout pulses are accepted."""
        with pytest.raises(ValueError, match="Unknown pulse"):
            rf_calibrated_kappa(baseline, "pulse1")


class TestLifetimeFit:
    """Test the exponential recovery fit."""

    def test_recovers_lifetime(self):
        """Test a noiseless 4 ms recovery."""
        delays = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0]) * 1e-3
        noise = 1.1 - 0.4 * np.exp(-delays / 4e-3)

        fit = fit_exponential_lifetime(delays, noise)

        assert fit.lifetime == pytest.approx(4e-3, rel=1e-4)
        assert fit.floor == pytest.approx(1.1, rel=1e-4)
        assert fit.residual_norm < 1e-6
        np.testing.assert_allclose(fit.predict(delays), noise, atol=1e-6)

    def test_weighted_fit(self):
        """Test that weights are accepted."""
        delays = np.array([0.5, 1.0, 2.0, 4.0, 8.0]) * 1e-3
        noise = 1.0 - 0.3 * np.exp(-delays / 2e-3)

        fit = fit_exponential_lifetime(delays, noise, weights=np.full(5, 1e4))

        assert fit.lifetime == pytest.approx(2e-3, rel=1e-3)

    def test_too_few_delays(self):
        """Test that two delays raise ValueError."""
        with pytest.raises(ValueError, match="three"):
            fit_exponential_lifetime([0.0, 1e-3, 1e-3], [0.5, 0.6, 0.6])

    def test_constant_data(self):
        """Test that flat data raise ValueError."""
        with pytest.raises(ValueError, match="constant"):
            fit_exponential_lifetime([0.0, 1e-3, 2e-3], [0.6, 0.6, 0.6])

    def test_bad_weights(self):
        """Test that non-positive weights raise ValueError."""
        with pytest.raises(ValueError, match="weights"):
            fit_exponential_lifetime([0.0, 1e-3, 2e-3], [0.5, 0.6, 0.7], weights=[1.0, 0.0, 1.0])


class TestReadoutPoints:
    """Test analytic and Monte Carlo readout figures of merit."""

    def test_pn_protocol_snr(self, baseline):
        """Test SNR 13.5 and 3.3e-16 T/sqrt(Hz) for the 15 ms pulse."""
        point = analyze_analytic(baseline, "pn")

        assert 10.455 <= point.snr <= 14.145
        assert point.snr == pytest.approx(13.48, rel=0.005)
        assert point.sensitivity_tau == pytest.approx(3.27e-16, rel=0.01)
        assert point.bandwidth == pytest.approx(0.88 / 15e-3)

    def test_entangled_noise_reduction(self, entangled):
        """Test atomic noise 1.5 +/- 0.5 dB below projection noise."""
        point = analyze_analytic(entangled, "entangled")

        reduction_db = 10 * np.log10(point.atomic_noise_pn)
        assert -2.0 <= reduction_db <= -1.0
        assert point.epr_variance < 1.0

    def test_entangled_beats_pn(self, entangled):
        """Test a higher SNR with the entangling probe at the same RF pulse."""
        assert analyze_analytic(entangled, "entangled").snr > analyze_analytic(entangled, "pn").snr

    def test_ideal_epr_variance(self, ideal):
        """Test that a near-complete swap leaves an EPR variance of xi^2."""
        config = replace(ideal, ensemble=replace(ideal.ensemble, gamma_swap=np.log(1e4) / (2 * 2e-3)))

        record = run_entanglement_protocol(config, None)

        variances = record.conditioned_variances["probe1"]
        assert epr_criterion(variances[Y_PLUS], variances[Z_PLUS]) == pytest.approx(1 / 6.3, rel=0.02)

    def test_monte_carlo_ideal_epr_variance(self, ideal):
        """Test that sampled conditional readout noise gives the exact EPR variance."""
        config = replace(ideal, ensemble=replace(ideal.ensemble, gamma_swap=np.log(1e4) / (2 * 2e-3)))
        probe = config.probe2
        kappa_sq = coupling_constant(config.ensemble.gamma_swap, probe.duration, probe.xi_squared) ** 2
        n = 4000

        ensemble = monte_carlo("entangled", config, n_shots=n, master_seed=21)
        residuals = conditional_residuals(ensemble, "probe2", ["probe1"])

        variances = np.var(residuals, axis=0, ddof=3)
        atomic = [
            atomic_noise_pn_units(to_shot_noise_units(v), kappa_sq, probe.xi_squared, probe.eta_detection)
            for v in variances
        ]
        sampled = epr_criterion(0.5 * atomic[1], 0.5 * atomic[0])
        stderrs = to_shot_noise_units(variances) * np.sqrt(2.0 / (n - 1)) / (probe.eta_detection * kappa_sq)
        stderr = np.sqrt(np.sum(stderrs**2)) / 2
        exact = analyze_analytic(config, "entangled").epr_variance
        assert exact < 1.0
        assert sampled == pytest.approx(exact, abs=3 * stderr)

    def test_monte_carlo_matches_analytic(self, baseline):
        """Test the sampled SNR against the exact one."""
        analytic = analyze_analytic(baseline, "pn")

        point, signal, reference = analyze_monte_carlo(baseline, "pn", n_shots=1500, master_seed=8)

        assert point.snr == pytest.approx(analytic.snr, abs=3 * point.snr_stderr)
        assert signal.n_shots == reference.n_shots == 1500

    def test_monte_carlo_entangled_correction(self, entangled):
        """Test that correcting with probe1 outcomes approaches the analytic noise."""
        analytic = analyze_analytic(entangled, "entangled")

        point, _, reference = analyze_monte_carlo(
            entangled, "entangled", n_shots=1500, master_seed=9
        )

        assert point.atomic_noise_pn == pytest.approx(
            analytic.atomic_noise_pn, abs=3 * point.atomic_noise_stderr + 0.01
        )
        corrected, coefficients = corrected_readout(reference)
        assert corrected.shape == (1500, 2)
        assert coefficients.shape == (3, 2)

    def test_calibration_rejected(self, baseline):
        """Test that readout analysis refuses the calibration protocol."""
        with pytest.raises(ValueError, match="calibration"):
            analyze_analytic(baseline, "calibration")

    def test_conditional_residuals(self, entangled):
        """Test readout residuals orthogonal to the entangling pulse's outcomes."""
        ensemble = monte_carlo("entangled", entangled, n_shots=200, master_seed=5)

        residuals = conditional_residuals(ensemble, "probe2", ["probe1"])

        regressors = ensemble.outcomes("probe1")
        assert residuals.shape == (200, 2)
        assert np.abs(regressors.T @ residuals).max() == pytest.approx(0.0, abs=1e-8)
        assert np.abs(residuals.mean(axis=0)).max() == pytest.approx(0.0, abs=1e-10)

    def test_conditional_residuals_without_regressors(self, entangled):
        """Test that no regressors leaves the centered outcomes."""
        ensemble = monte_carlo("entangled", entangled, n_shots=50, master_seed=6)

        residuals = conditional_residuals(ensemble, "probe2", [])

        outcomes = ensemble.outcomes("probe2")
        np.testing.assert_allclose(residuals, outcomes - outcomes.mean(axis=0), atol=1e-12)

    def test_conditional_residuals_rejects_bad_input(self, entangled):
        """Test unknown pulses and too few shots."""
        ensemble = monte_carlo("entangled", entangled, n_shots=3, master_seed=7)

        with pytest.raises(ValueError, match="Unknown pulse"):
            conditional_residuals(ensemble, "pulse9", ["probe1"])
        with pytest.raises(ValueError, match="shots"):
            conditional_residuals(ensemble, "probe2", ["probe1"])


class TestSweeps:
    """Test delay and RF-duration sweeps."""

    def test_with_sweep_value(self, entangled):
        """Test that each variable lands in its field."""
        assert with_sweep_value(entangled, "delay", 2e-3).delay == 2e-3
        assert with_sweep_value(entangled, "rf.duration", 2e-3).rf.duration == 2e-3
        with pytest.raises(ValueError):
            with_sweep_value(entangled, "b_dc", 1.0)

    def test_constant_improvement_factor(self, entangled):
        """Test that entangled over unentangled SNR times bandwidth is flat in bandwidth."""
        spec = SweepSpec(
            variable="rf.duration",
            values=[0.88 / delta for delta in (200.0, 500.0, 1000.0, 2000.0)],
            method="analytic",
        )

        frame, fit = run_sweep(entangled, spec)

        product = frame[frame["quantity"] == "snr_times_bandwidth"]
        table = product.pivot(index="x", columns="series", values="value")
        ratio = table["entangled"] / table["pn"]
        assert fit is None
        assert (ratio > 1.0).all()
        assert (ratio.max() - ratio.min()) / ratio.mean() < 0.1

    def test_delay_sweep_lifetime(self, entangled):
        """Test that the entangled noise recovers with a lifetime of milliseconds."""
        spec = SweepSpec(
            variable="delay", values=[0.1e-3, 1e-3, 2e-3, 4e-3, 8e-3, 16e-3], method="analytic"
        )

        frame, fit = run_sweep(entangled, spec)

        noise = frame[(frame["quantity"] == "atomic_noise") & (frame["series"] == "entangled")]
        assert noise["value"].is_monotonic_increasing
        assert fit is not None
        assert 1e-3 < fit.lifetime < 100e-3
        assert set(frame["series"]) == {"entangled", "pn"}

    def test_monte_carlo_sweep(self, entangled):
        """Test that Monte Carlo rows carry standard errors."""
        spec = SweepSpec(variable="delay", values=[0.1e-3, 4e-3], method="monte_carlo")

        frame, fit = run_sweep(entangled, spec, n_shots=200)

        assert fit is None
        assert (frame.loc[frame["quantity"] == "snr", "stderr"] > 0).all()
        assert len(frame[frame["quantity"] == "epr_variance"]) == 2

    def test_one_cell_rejected(self, entangled):
        """Test that sweeps need the two-cell configuration."""
        config = replace(entangled, cell_config="one", ensemble=replace(entangled.ensemble, n_cells=1))

        with pytest.raises(ValueError, match="two cells"):
            run_sweep(config)


class TestModeOptimization:
    """Test the readout mode scan."""

    def test_optimum_near_total_rate(self, baseline):
        """Test that the best falling mode over the default grid lies near twice the total rate."""
        grid = baseline.mode_gamma_grid
        target = 2 * baseline.ensemble.gamma_total

        result = optimize_mode_gamma(baseline, grid)

        assert len(grid) == 19
        assert 0.75 * target <= result.gamma_opt <= 1.25 * target
        assert list(result.curve.columns) == ["mode_gamma", "snr", "stderr"]
        assert len(result.curve) == len(grid)

    def test_ties_pick_smallest_rate(self, baseline):
        """Test that a flat SNR curve returns the smallest grid value."""
        config = replace(baseline, rf=replace(baseline.rf, amplitude=0.0))

        result = optimize_mode_gamma(config, [900.0, 300.0, 600.0])

        assert result.gamma_opt == 300.0

    def test_invalid_inputs(self, baseline):
        """Test that an empty grid or unknown path raises ValueError."""
        with pytest.raises(ValueError, match="empty"):
            optimize_mode_gamma(baseline, [])
        with pytest.raises(ValueError, match="path"):
            optimize_mode_gamma(baseline, [500.0], path="both")
