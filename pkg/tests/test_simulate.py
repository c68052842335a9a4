"""Simulation engines: determinism, statistics, and fit-closure checks."""

import numpy as np
import pytest

import g4vlines as g

PBV = g.REGISTRY.get("PbV")


def _cfg(**overrides):
    base = dict(emitter=PBV, temperature=6.2,
                grid=g.FrequencyGrid(-150.0, 150.0, 3.0),
                dwell=0.1, peak_rate=5000.0, background_rate=100.0, seed=1)
    base.update(overrides)
    return g.ScanSeriesConfig(**base)


class TestConfigValidation:
    def test_grid(self):
        with pytest.raises(ValueError):
            g.FrequencyGrid(0.0, 10.0, -1.0)
        with pytest.raises(ValueError):
            g.FrequencyGrid(10.0, 0.0, 1.0)
        assert g.FrequencyGrid(-10.0, 10.0, 5.0).centers().tolist() == \
            [-10.0, -5.0, 0.0, 5.0, 10.0]

    @pytest.mark.parametrize("bad", [
        dict(dwell=0.0), dict(peak_rate=-1.0), dict(temperature=-1.0),
        dict(jump_prob=1.5), dict(ionization_coeff=-0.1),
        dict(repump="sometimes"), dict(n_scans=0),
    ])
    def test_bad_fields(self, bad):
        with pytest.raises(ValueError):
            _cfg(**bad)

    def test_fails_before_sampling_on_bad_linewidth(self):
        p = g.EmitterParams("bad", f_gs=100.0, f_es=500.0, gamma0=30.0,
                            gamma_others=-100.0)
        with pytest.warns(g.NegativeLinewidthWarning):
            with pytest.raises(ValueError, match="linewidth"):
                g.simulate_ple_scan(_cfg(emitter=p))


class TestPleScan:
    def test_deterministic(self):
        s1 = g.simulate_ple_scan(_cfg(seed=7))
        s2 = g.simulate_ple_scan(_cfg(seed=7))
        assert np.array_equal(s1.counts, s2.counts)
        s3 = g.simulate_ple_scan(_cfg(seed=8))
        assert not np.array_equal(s1.counts, s3.counts)

    def test_flat_background_when_peak_rate_zero(self):
        cfg = _cfg(peak_rate=0.0, background_rate=2000.0, seed=3)
        spec = g.simulate_ple_scan(cfg)
        mean = cfg.dwell * cfg.background_rate
        n = len(spec)
        assert abs(spec.counts.mean() - mean) < 3.0 * np.sqrt(mean / n)

    def test_noiseless_closure_with_fit(self):
        spec = g.simulate_ple_scan(_cfg(noiseless=True))
        report = g.fit_lorentzian(spec)
        assert report.params["fwhm"] == pytest.approx(
            g.linewidth_c(PBV, 6.2), rel=1e-6)
        assert report.params["center"] == pytest.approx(0.0, abs=1e-6)

    def test_poisson_fidelity(self):
        # per-point sample mean over 1e4 repetitions within 3 sigma
        cfg0 = _cfg(grid=g.FrequencyGrid(-40.0, 40.0, 20.0), dwell=0.05)
        n_rep = 10_000
        total = np.zeros(len(cfg0.grid.centers()))
        for rep in range(n_rep):
            total += g.simulate_ple_scan(_cfg(
                grid=cfg0.grid, dwell=cfg0.dwell, seed=rep)).counts
        expected = g.simulate_ple_scan(_cfg(
            grid=cfg0.grid, dwell=cfg0.dwell, noiseless=True)).counts
        sample_mean = total / n_rep
        tol = 3.0 * np.sqrt(expected / n_rep)
        assert np.all(np.abs(sample_mean - expected) < tol)

    def test_requires_single_scan(self):
        with pytest.raises(ValueError, match="n_scans"):
            g.simulate_ple_scan(_cfg(n_scans=3))


class TestScanSeries:
    def test_deterministic(self):
        kw = dict(n_scans=10, diffusion_sigma=4.0, ionization_coeff=3e-4,
                  repump="between_scans", seed=12)
        a_spectra, a_events = g.simulate_scan_series(_cfg(**kw))
        b_spectra, b_events = g.simulate_scan_series(_cfg(**kw))
        assert all(np.array_equal(x.counts, y.counts)
                   for x, y in zip(a_spectra, b_spectra))
        assert a_events == b_events

    def test_first_scan_matches_single_scan(self):
        spectra, _ = g.simulate_scan_series(_cfg(n_scans=5, seed=9))
        single = g.simulate_ple_scan(_cfg(seed=9))
        assert np.array_equal(spectra[0].counts, single.counts)

    def test_static_series_identical_in_expectation(self):
        spectra, events = g.simulate_scan_series(
            _cfg(n_scans=6, noiseless=True))
        for spec in spectra[1:]:
            assert np.array_equal(spec.counts, spectra[0].counts)
        assert all(ev.kind == "scan_start" for ev in events)
        assert all(ev.center_mhz == 0.0 for ev in events)

    def test_center_scatter_consistent_with_shot_noise(self):
        spectra, _ = g.simulate_scan_series(_cfg(n_scans=30, seed=21))
        centers, errors = [], []
        for spec in spectra:
            rep = g.fit_lorentzian(spec)
            centers.append(rep.params["center"])
            errors.append(rep.std_errors["center"])
        scatter = np.std(centers, ddof=1)
        assert scatter < 2.5 * np.mean(errors)

    def test_diffusion_broadens_average(self):
        spectra, events = g.simulate_scan_series(
            _cfg(n_scans=50, diffusion_sigma=5.0, peak_rate=20000.0, seed=31))
        grid = spectra[0].detunings
        avg = g.Spectrum(grid, np.mean([s.counts for s in spectra], axis=0))
        fwhm_avg = g.fit_lorentzian(avg).params["fwhm"]
        singles = [g.fit_lorentzian(s).params["fwhm"] for s in spectra]
        assert fwhm_avg > np.median(singles)

        # oracle: superpose noiseless profiles at the realized centers
        width = g.linewidth_c(PBV, 6.2)
        centers = [ev.center_mhz for ev in events if ev.kind == "scan_start"]
        profile = np.mean([g.lorentzian(grid, c, width, 1.0, 0.0)
                           for c in centers], axis=0)
        oracle = g.fit_lorentzian(
            g.Spectrum(grid, 2000.0 * profile / profile.max() + 10.0))
        assert fwhm_avg == pytest.approx(oracle.params["fwhm"], rel=0.10)

    def test_ionization_extinction_and_recovery(self):
        kw = dict(n_scans=12, ionization_coeff=5e-4, repump="between_scans",
                  noiseless=True, seed=5)
        spectra, events = g.simulate_scan_series(_cfg(**kw))
        ionizations = [ev for ev in events if ev.kind == "ionization"]
        assert ionizations, "expected at least one ionization event"
        # extinction clusters near resonance where the absorption is strongest
        grid = spectra[0].detunings
        offsets = [abs(grid[ev.point_index]) for ev in ionizations]
        assert np.median(offsets) < 60.0
        # the scan after an ionization starts bright again
        ev = ionizations[0]
        if ev.scan_index + 1 < len(spectra):
            nxt = spectra[ev.scan_index + 1]
            assert nxt.counts.max() > 5.0 * _cfg().dwell * _cfg().background_rate
        # mid-scan extinction: points after the event show only background
        bg = _cfg().dwell * _cfg().background_rate
        struck = spectra[ev.scan_index]
        assert np.allclose(struck.counts[ev.point_index + 1:], bg)

    def test_repump_none_stays_dark(self):
        kw = dict(n_scans=12, ionization_coeff=2e-3, repump="none",
                  noiseless=True, seed=5)
        spectra, events = g.simulate_scan_series(_cfg(**kw))
        first_ion = next(ev for ev in events if ev.kind == "ionization")
        bg = _cfg().dwell * _cfg().background_rate
        for spec in spectra[first_ion.scan_index + 1:]:
            assert np.allclose(spec.counts, bg)

    def test_resonant_repump_recovers(self):
        kw = dict(n_scans=12, ionization_coeff=2e-3, repump="resonant",
                  repump_rate=2e-3, noiseless=True, seed=5)
        _, events = g.simulate_scan_series(_cfg(**kw))
        kinds = [ev.kind for ev in events]
        assert "ionization" in kinds and "repump" in kinds

    def test_bright_fraction_monotone_in_ionization(self):
        def bright_fraction(coeff):
            fractions = []
            for seed in (2, 3, 4):
                spectra, _ = g.simulate_scan_series(_cfg(
                    n_scans=20, ionization_coeff=coeff,
                    repump="between_scans", noiseless=True, seed=seed))
                bg = _cfg().dwell * _cfg().background_rate
                points = np.concatenate([s.counts for s in spectra])
                fractions.append(np.mean(points > bg))
            return np.mean(fractions)

        values = [bright_fraction(c) for c in (0.0, 5e-4, 2e-3, 1e-2)]
        assert values[0] == 1.0
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]


class TestTrpl:
    def test_deterministic(self):
        t1 = g.simulate_trpl(4.4, 100_000, bin_width=0.2, t_max=60.0, seed=4)
        t2 = g.simulate_trpl(4.4, 100_000, bin_width=0.2, t_max=60.0, seed=4)
        assert np.array_equal(t1.counts, t2.counts)

    def test_exp1_closure(self):
        trace = g.simulate_trpl(4.4, 1_000_000, bin_width=0.2, t_max=60.0, seed=3)
        report = g.fit_decay(trace, "exp1")
        assert report.params["tau"] == pytest.approx(4.4, rel=0.01)

    def test_exp2_closure(self):
        trace = g.simulate_trpl(
            5.5, 2_000_000, bin_width=0.1, t_max=60.0,
            background=g.TrplBackground(a_fast=6.0, tau_fast=0.5), seed=11)
        report = g.fit_decay(trace, "exp2")
        assert report.params["tau_slow"] == pytest.approx(5.5, rel=0.02)
        assert report.derived["transform_limit_mhz"] == pytest.approx(28.9, abs=0.8)

    def test_zero_counts_total(self):
        trace = g.simulate_trpl(4.4, 0, bin_width=0.5, t_max=50.0, seed=1)
        assert trace.counts.sum() == 0
        with pytest.raises(ValueError, match="no decay"):
            g.fit_decay(trace)

    def test_short_window_warns(self):
        with pytest.warns(UserWarning, match="10 lifetimes"):
            g.simulate_trpl(10.0, 1000, bin_width=0.5, t_max=50.0, seed=1)

    def test_total_counts_conserved_up_to_clipping(self):
        trace = g.simulate_trpl(4.4, 50_000, bin_width=0.2, t_max=80.0, seed=2)
        clipped = 50_000 * np.exp(-80.0 / 4.4)
        assert 50_000 - trace.counts.sum() <= max(10 * clipped, 10)

    def test_errors(self):
        with pytest.raises(ValueError):
            g.simulate_trpl(-1.0, 100, bin_width=0.5, t_max=50.0)
        with pytest.raises(ValueError):
            g.simulate_trpl(4.4, -5, bin_width=0.5, t_max=50.0)
        with pytest.raises(ValueError):
            g.TrplBackground(a_fast=-1.0, tau_fast=0.5)


class TestHbt:
    def test_deterministic(self):
        h1 = g.simulate_hbt(2e5, 4.4, 0.9, 2.0, bin_width=2.0, tau_max=60.0, seed=6)
        h2 = g.simulate_hbt(2e5, 4.4, 0.9, 2.0, bin_width=2.0, tau_max=60.0, seed=6)
        assert np.array_equal(h1.coincidence_counts, h2.coincidence_counts)

    def test_pure_background_is_flat(self):
        hist = g.simulate_hbt(3e5, 4.4, 0.0, 5.0, bin_width=2.0, tau_max=60.0,
                              seed=1)
        sigma = 1.0 / np.sqrt(hist.normalization)
        assert np.all(np.abs(hist.g2 - 1.0) < 4.0 * sigma)
        assert abs(hist.g2.mean() - 1.0) < 3.0 * sigma / np.sqrt(len(hist))

    def test_pure_emitter_antibunches(self):
        hist = g.simulate_hbt(3e5, 4.4, 1.0, 5.0, bin_width=1.0, tau_max=50.0,
                              seed=2)
        m = len(hist) // 2
        assert hist.g2[m] < 0.2
        assert abs(hist.g2[0] - 1.0) < 0.3  # flat far from zero delay

    def test_mixture_matches_analytic_curve(self):
        rate, lifetime, rho, bw = 1e6, 4.4, 0.959, 1.0
        hist = g.simulate_hbt(rate, lifetime, rho, 5.0, bin_width=bw,
                              tau_max=60.0, seed=14)
        # independent oracle: two-level renewal autocorrelation mixed with
        # flat background, averaged over each bin
        excitation = 1.0 / (1.0 / (rho * rate) - lifetime * 1e-9)
        tau_c = 1e9 / (excitation + 1e9 / lifetime)
        tau = hist.tau_bins
        lo = np.maximum(np.abs(tau) - bw / 2.0, 0.0)
        hi = np.abs(tau) + bw / 2.0
        avg_exp = np.where(
            np.abs(tau) < bw / 4.0,
            (2.0 * tau_c / bw) * (1.0 - np.exp(-bw / (2.0 * tau_c))),
            (tau_c / bw) * (np.exp(-lo / tau_c) - np.exp(-hi / tau_c)))
        expected = (1.0 - rho ** 2 * avg_exp) * hist.normalization
        chi2 = float(np.sum((hist.coincidence_counts - expected) ** 2 / expected))
        assert chi2 / len(tau) < 2.0

    def test_symmetry_within_statistics(self):
        hist = g.simulate_hbt(5e5, 4.4, 0.8, 4.0, bin_width=2.0, tau_max=80.0,
                              seed=9)
        fwd = hist.g2[len(hist) // 2 + 1:]
        bwd = hist.g2[:len(hist) // 2][::-1]
        sigma = 1.0 / np.sqrt(hist.normalization)
        assert np.all(np.abs(fwd - bwd) < 6.0 * sigma)

    def test_errors(self):
        with pytest.raises(ValueError):
            g.simulate_hbt(1e5, 4.4, 1.5, 1.0, bin_width=1.0, tau_max=50.0)
        with pytest.raises(ValueError):
            g.simulate_hbt(-1e5, 4.4, 0.5, 1.0, bin_width=1.0, tau_max=50.0)
        with pytest.raises(ValueError, match="too high"):
            g.simulate_hbt(3e8, 4.4, 1.0, 0.1, bin_width=1.0, tau_max=50.0)


class TestCorrelateStream:
    def test_poisson_stream_flat(self):
        rng = np.random.default_rng(23)
        duration = 2e9  # 2 s in ns
        times = np.sort(rng.uniform(0.0, duration, 200_000))
        hist = g.correlate_stream(times, bin_width=20.0, tau_max=400.0,
                                  duration=duration)
        sigma = 1.0 / np.sqrt(hist.normalization)
        assert np.all(np.abs(hist.g2 - 1.0) < 4.5 * sigma)

    def test_pulse_train_comb(self):
        period, n = 100.0, 2000
        times = period * np.arange(n, dtype=float)
        hist = g.correlate_stream(times, bin_width=5.0, tau_max=350.0,
                                  duration=period * n)
        m = len(hist) // 2
        per_bin = dict(zip(np.rint(hist.tau_bins).astype(int),
                           hist.coincidence_counts))
        assert per_bin[0] == 0  # self pairs removed
        for k in (1, 2, 3):
            assert per_bin[100 * k] == n - k
            assert per_bin[-100 * k] == n - k
        others = [c for t, c in per_bin.items() if t % 100 != 0]
        assert max(others) == 0

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            g.correlate_stream(np.array([0.0, 5.0, 3.0]), bin_width=1.0,
                               tau_max=10.0)

    def test_negative_times_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            g.correlate_stream(np.array([-1.0, 5.0]), bin_width=1.0,
                               tau_max=10.0)

    def test_matches_hbt_statistics(self):
        # autocorrelating the merged stream shows the same antibunching dip
        hist = g.simulate_hbt(5e5, 4.4, 1.0, 2.0, bin_width=4.4, tau_max=44.0,
                              seed=3)
        m = len(hist) // 2
        assert hist.g2[m] < 0.5
        assert hist.g2[m] < hist.g2[0]
