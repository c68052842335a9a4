"""Synthetic experiments: PLE scans, decay histograms, photon correlations.

Every generator takes a 64-bit seed and is bit-reproducible for a fixed
configuration. Independent substreams are derived from (seed, index) through
numpy's SeedSequence, one per scan, so scan k of a series does not depend on
how many draws earlier scans consumed:

    Generator(PCG64(SeedSequence((seed, index))))
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import physics
from ._kernels import coincidence_histogram
from .emitters import EmitterParams
from .records import CorrelationHistogram, DecayTrace, Spectrum

__all__ = [
    "FrequencyGrid", "ScanSeriesConfig", "ScanEvent", "TrplBackground",
    "simulate_ple_scan", "simulate_scan_series", "simulate_trpl",
    "simulate_hbt", "correlate_stream", "substream",
]

_MASK64 = (1 << 64) - 1
_MAX_STREAM_PHOTONS = 2e8

REPUMP_POLICIES = ("none", "between_scans", "resonant")


def substream(seed: int, index: int) -> np.random.Generator:
    """Documented split function: independent generator for (seed, index)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((int(seed) & _MASK64, int(index)))))


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning grid in MHz: start, start+step, ..., <= stop."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.stop <= self.start:
            raise ValueError("grid stop must exceed start")

    def centers(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True)
class TrplBackground:
    """Fast background component of a decay: amplitude ratio and lifetime.

    a_fast is the t=0 amplitude of the fast exponential relative to the
    (unit) amplitude of the signal component; tau_fast in ns.
    """

    a_fast: float
    tau_fast: float

    def __post_init__(self):
        if self.a_fast <= 0 or self.tau_fast <= 0:
            raise ValueError("background a_fast and tau_fast must be positive")


@dataclass(frozen=True)
class ScanSeriesConfig:
    """Inputs for simulate_ple_scan / simulate_scan_series.

    The line center starts at center0 and random-walks by diffusion_sigma
    (MHz) per scan, with a probability jump_prob per scan of an extra jump
    of scale jump_sigma. A two-state charge variable turns the emitter dark
    with per-point hazard ionization_coeff x expected signal counts; the
    repump policy controls recovery ("none", "between_scans", or "resonant"
    with per-point probability repump_rate x expected signal counts).
    """

    emitter: EmitterParams
    temperature: float
    grid: FrequencyGrid
    dwell: float
    peak_rate: float
    background_rate: float
    n_scans: int = 1
    center0: float = 0.0
    diffusion_sigma: float = 0.0
    jump_prob: float = 0.0
    jump_sigma: float = 0.0
    ionization_coeff: float = 0.0
    repump: str = "none"
    repump_rate: float = 0.0
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.dwell <= 0:
            raise ValueError("dwell must be positive")
        if self.peak_rate < 0 or self.background_rate < 0:
            raise ValueError("rates must be >= 0")
        if self.n_scans < 1:
            raise ValueError("n_scans must be >= 1")
        if not 0.0 <= self.jump_prob <= 1.0:
            raise ValueError("jump_prob must be in [0, 1]")
        if self.diffusion_sigma < 0 or self.jump_sigma < 0:
            raise ValueError("diffusion_sigma and jump_sigma must be >= 0")
        if self.ionization_coeff < 0:
            raise ValueError("ionization_coeff must be >= 0")
        if self.repump not in REPUMP_POLICIES:
            raise ValueError(
                f"repump must be one of {REPUMP_POLICIES}, got {self.repump!r}")
        if self.repump_rate < 0:
            raise ValueError("repump_rate must be >= 0")

    def fwhm(self) -> float:
        """Model linewidth used for the scan shape (MHz)."""
        width = physics.linewidth_c(self.emitter, self.temperature)
        if width <= 0:
            raise ValueError(
                f"model linewidth is not positive ({width:.3g} MHz); "
                "check gamma_others")
        return width


@dataclass(frozen=True)
class ScanEvent:
    """One entry of the scan-series event log."""

    scan_index: int
    point_index: int   # -1 for scan_start
    time_s: float
    kind: str          # scan_start | ionization | repump
    center_mhz: float


def _lorentz_peak_normalized(detuning, center, fwhm):
    h2 = (fwhm / 2.0) ** 2
    d = detuning - center
    return h2 / (d * d + h2)


def simulate_ple_scan(cfg: ScanSeriesConfig) -> Spectrum:
    """One Poisson-sampled PLE scan (requires n_scans == 1).

    Expected counts per point: dwell * (background_rate + peak_rate * L(d))
    with L normalized to 1 at resonance. noiseless=True returns the
    expectation itself.
    """
    if cfg.n_scans != 1:
        raise ValueError("simulate_ple_scan needs n_scans == 1; "
                         "use simulate_scan_series")
    fwhm = cfg.fwhm()
    grid = cfg.grid.centers()
    expected = cfg.dwell * (cfg.background_rate + cfg.peak_rate
                            * _lorentz_peak_normalized(grid, cfg.center0, fwhm))
    if cfg.noiseless:
        counts = expected
    else:
        counts = substream(cfg.seed, 0).poisson(expected).astype(float)
    meta = {"temperature_k": cfg.temperature, "emitter": cfg.emitter.name,
            "scan_index": 0, "seed": cfg.seed}
    return Spectrum(grid, counts, meta)


def simulate_scan_series(cfg: ScanSeriesConfig):
    """Scan series with spectral diffusion and charge-state telegraphing.

    Returns (spectra, events). Scans are sequentially dependent: the line
    center random-walks between scans and the bright/dark charge state
    carries over according to the repump policy. Events log scan starts
    (with the realized center), ionizations and repumps.
    """
    fwhm = cfg.fwhm()
    grid = cfg.grid.centers()
    n_points = grid.size
    scan_time = n_points * cfg.dwell

    spectra: list[Spectrum] = []
    events: list[ScanEvent] = []
    center = cfg.center0
    bright = True

    for k in range(cfg.n_scans):
        rng = substream(cfg.seed, k)
        if k > 0:
            if cfg.diffusion_sigma > 0:
                center += rng.normal(0.0, cfg.diffusion_sigma)
            if cfg.jump_prob > 0 and rng.random() < cfg.jump_prob:
                center += rng.normal(0.0, cfg.jump_sigma)
        if cfg.repump == "between_scans":
            bright = True
        events.append(ScanEvent(k, -1, k * scan_time, "scan_start", center))

        expected_signal = cfg.dwell * cfg.peak_rate \
            * _lorentz_peak_normalized(grid, center, fwhm)
        bg = cfg.dwell * cfg.background_rate
        counts = np.empty(n_points)
        for i in range(n_points):
            lam = bg + (expected_signal[i] if bright else 0.0)
            counts[i] = lam if cfg.noiseless else rng.poisson(lam)
            t_point = k * scan_time + (i + 1) * cfg.dwell
            if bright:
                if cfg.ionization_coeff > 0 and \
                        rng.random() < min(1.0, cfg.ionization_coeff * expected_signal[i]):
                    bright = False
                    events.append(ScanEvent(k, i, t_point, "ionization", center))
            elif cfg.repump == "resonant" and cfg.repump_rate > 0:
                if rng.random() < min(1.0, cfg.repump_rate * expected_signal[i]):
                    bright = True
                    events.append(ScanEvent(k, i, t_point, "repump", center))
        meta = {"temperature_k": cfg.temperature, "emitter": cfg.emitter.name,
                "scan_index": k, "seed": cfg.seed, "center_mhz": center}
        spectra.append(Spectrum(grid, counts, meta))
    return spectra, events


def simulate_trpl(lifetime: float, counts_total: int, *, bin_width: float,
                  t_max: float, background: TrplBackground | None = None,
                  seed: int = 0) -> DecayTrace:
    """Histogram of photon arrival times after pulsed excitation.

    Arrivals are drawn from exp(-t/lifetime), optionally mixed with a fast
    background component; arrivals beyond t_max fall outside the histogram.
    All times in ns.
    """
    if lifetime <= 0:
        raise ValueError("lifetime must be positive")
    if counts_total < 0:
        raise ValueError("counts_total must be >= 0")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    n_bins = int(round(t_max / bin_width))
    if n_bins < 2:
        raise ValueError("t_max must cover at least two bins")
    if t_max < 10.0 * lifetime:
        warnings.warn(f"t_max = {t_max} ns is below 10 lifetimes; "
                      "the tail will be clipped", stacklevel=2)

    rng = substream(seed, 0)
    n = int(counts_total)
    if background is None:
        times = rng.exponential(lifetime, n)
    else:
        # amplitude ratio -> count fraction of the fast component
        frac_fast = background.a_fast * background.tau_fast \
            / (background.a_fast * background.tau_fast + lifetime)
        n_fast = rng.binomial(n, frac_fast) if n else 0
        times = np.concatenate([
            rng.exponential(background.tau_fast, n_fast),
            rng.exponential(lifetime, n - n_fast),
        ])
    edges = bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(times, edges)
    centers = edges[:-1] + bin_width / 2.0
    meta = {"bin_width_ns": bin_width, "seed": seed}
    return DecayTrace(centers, counts.astype(float), meta)


def simulate_hbt(rate: float, lifetime: float, purity_rho: float,
                 duration: float, *, bin_width: float, tau_max: float,
                 seed: int = 0) -> CorrelationHistogram:
    """HBT experiment on a two-level emitter mixed with Poisson background.

    ``rate`` is the total detected count rate (counts/s) of the combined
    stream; a fraction ``purity_rho`` of it comes from the emitter, the rest
    is uncorrelated background. Emitter photons follow a
    ground -> excited -> photon cycle, so consecutive emissions are
    separated by an excitation wait plus a decay wait; the resulting ideal
    autocorrelation is g2(tau) = 1 - exp(-|tau|/tau_c) with
    tau_c = 1/(W + 1/lifetime) -> lifetime at low excitation rate W.

    The merged stream is split 50:50 and all pairs within +-tau_max are
    histogrammed (full correlation); ``bin_width``/``tau_max``/``lifetime``
    in ns, others in s.
    """
    if not 0.0 <= purity_rho <= 1.0:
        raise ValueError("purity_rho must be in [0, 1]")
    if rate <= 0 or duration <= 0:
        raise ValueError("rate and duration must be positive")
    if lifetime <= 0:
        raise ValueError("lifetime must be positive")
    if bin_width <= 0 or tau_max < bin_width:
        raise ValueError("need bin_width > 0 and tau_max >= bin_width")
    if rate * duration > _MAX_STREAM_PHOTONS:
        raise ValueError("stream too large; reduce rate or duration")

    lifetime_s = lifetime * 1e-9
    emitter_rate = purity_rho * rate
    bg_rate = (1.0 - purity_rho) * rate
    if emitter_rate > 0 and emitter_rate >= 0.5 / lifetime_s:
        raise ValueError("emitter rate too high for the given lifetime "
                         "(needs rate * purity_rho << 1/lifetime)")

    rng = substream(seed, 0)
    parts = []
    if emitter_rate > 0:
        excitation_rate = 1.0 / (1.0 / emitter_rate - lifetime_s)
        t = 0.0
        mean_wait = 1.0 / excitation_rate + lifetime_s
        while t < duration:
            n = int((duration - t) / mean_wait * 1.05) + 16
            waits = rng.exponential(1.0 / excitation_rate, n) \
                + rng.exponential(lifetime_s, n)
            ts = t + np.cumsum(waits)
            parts.append(ts[ts < duration])
            t = ts[-1]
    if bg_rate > 0:
        n_bg = rng.poisson(bg_rate * duration)
        parts.append(np.sort(rng.uniform(0.0, duration, n_bg)))

    stream = np.sort(np.concatenate(parts)) if parts else np.empty(0)
    if stream.size < 2:
        raise ValueError("stream contains fewer than 2 photons; "
                         "increase rate or duration")
    to_b = rng.random(stream.size) < 0.5
    det_a = stream[~to_b] * 1e9
    det_b = stream[to_b] * 1e9

    m_max = int(round(tau_max / bin_width))
    counts = coincidence_histogram(det_a, det_b, bin_width, m_max)
    duration_ns = duration * 1e9
    normalization = (det_a.size / duration_ns) * (det_b.size / duration_ns) \
        * duration_ns * bin_width
    tau_bins = bin_width * np.arange(-m_max, m_max + 1)
    g2 = counts / normalization
    return CorrelationHistogram(tau_bins, g2, counts, normalization)


def correlate_stream(arrival_times, *, bin_width: float, tau_max: float,
                     duration: float | None = None) -> CorrelationHistogram:
    """Full autocorrelation histogram of one sorted photon stream (ns).

    All ordered pairs within +-tau_max are counted with a sliding window
    (self-pairs excluded); the per-bin normalization is
    rate^2 * duration * bin_width with rate = n_photons / duration.
    ``duration`` defaults to the last arrival time.
    """
    t = np.asarray(arrival_times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("need at least two arrival times")
    if t[0] < 0:
        raise ValueError("arrival times must be >= 0")
    if np.any(np.diff(t) < 0):
        raise ValueError("arrival times must be sorted ascending")
    if bin_width <= 0 or tau_max < bin_width:
        raise ValueError("need bin_width > 0 and tau_max >= bin_width")
    if duration is None:
        duration = float(t[-1])
    if duration <= 0:
        raise ValueError("duration must be positive")

    m_max = int(round(tau_max / bin_width))
    counts = coincidence_histogram(t, t, bin_width, m_max)
    counts[m_max] -= t.size  # drop self-pairs
    rate = t.size / duration
    normalization = rate * rate * duration * bin_width
    tau_bins = bin_width * np.arange(-m_max, m_max + 1)
    g2 = counts / normalization
    return CorrelationHistogram(tau_bins, g2, counts, normalization)
