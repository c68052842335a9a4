"""Coherent optical lineshapes of group-IV vacancy centers in diamond.

Closed-form single-phonon linewidth model, least-squares fitting of PLE and
lifetime data, and seeded Monte Carlo simulation of scans, decay histograms
and photon correlations.
"""

__version__ = "0.1.0"

from .constants import H_OVER_KB_K_PER_GHZ
from .emitters import EmitterParams, EmitterRegistry, REGISTRY
from .physics import (
    bose_occupation, phonon_rates, PhononRates,
    linewidth_c, linewidth_d, linewidth_difference,
    transform_limit, lifetime_from_linewidth,
    temperature_threshold, lorentzian,
    linewidth_breakdown, LinewidthBreakdown,
    NegativeLinewidthWarning,
)
from .records import Spectrum, DecayTrace, CorrelationHistogram, FitReport
from .fitting import (
    fit_lorentzian, fit_decay, fit_cubic_alpha, fit_temperature_series,
    data_digest,
)
from .simulate import (
    FrequencyGrid, ScanSeriesConfig, ScanEvent, TrplBackground,
    simulate_ple_scan, simulate_scan_series, simulate_trpl, simulate_hbt,
    correlate_stream, substream,
)

__all__ = [
    "__version__", "H_OVER_KB_K_PER_GHZ",
    "EmitterParams", "EmitterRegistry", "REGISTRY",
    "bose_occupation", "phonon_rates", "PhononRates",
    "linewidth_c", "linewidth_d", "linewidth_difference",
    "transform_limit", "lifetime_from_linewidth",
    "temperature_threshold", "lorentzian",
    "linewidth_breakdown", "LinewidthBreakdown", "NegativeLinewidthWarning",
    "Spectrum", "DecayTrace", "CorrelationHistogram", "FitReport",
    "fit_lorentzian", "fit_decay", "fit_cubic_alpha", "fit_temperature_series",
    "data_digest",
    "FrequencyGrid", "ScanSeriesConfig", "ScanEvent", "TrplBackground",
    "simulate_ple_scan", "simulate_scan_series", "simulate_trpl",
    "simulate_hbt", "correlate_stream", "substream",
]
