"""Data records passed between the simulation, fitting and I/O layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Spectrum", "DecayTrace", "CorrelationHistogram", "FitReport"]


def _column(values, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass
class Spectrum:
    """One PLE scan: counts versus laser detuning.

    detunings: MHz, strictly increasing. counts: nonnegative.
    meta: free-form acquisition metadata (temperature_k, power_nw,
    scan_index, emitter, ...).
    """

    detunings: np.ndarray
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.detunings = _column(self.detunings, "detunings")
        self.counts = _column(self.counts, "counts")
        if self.detunings.size != self.counts.size:
            raise ValueError(
                f"detunings ({self.detunings.size}) and counts "
                f"({self.counts.size}) differ in length")
        if np.any(np.diff(self.detunings) <= 0):
            raise ValueError("detunings must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValueError("counts must be >= 0")

    def __len__(self) -> int:
        return self.detunings.size


@dataclass
class DecayTrace:
    """Time-binned photon counts after pulsed excitation.

    bin_centers: ns, uniformly spaced (to 1e-9 relative). counts: >= 0;
    real-valued so that noiseless model traces are representable.
    """

    bin_centers: np.ndarray
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bin_centers = _column(self.bin_centers, "bin_centers")
        self.counts = _column(self.counts, "counts")
        if self.bin_centers.size != self.counts.size:
            raise ValueError("bin_centers and counts differ in length")
        if self.bin_centers.size >= 2:
            steps = np.diff(self.bin_centers)
            if np.any(steps <= 0):
                raise ValueError("bin_centers must be strictly increasing")
            width = steps[0]
            if np.any(np.abs(steps - width) > 1e-9 * width):
                raise ValueError("bin spacing must be uniform to 1e-9 relative")
        if np.any(self.counts < 0):
            raise ValueError("counts must be >= 0")

    def __len__(self) -> int:
        return self.bin_centers.size

    @property
    def bin_width(self) -> float:
        if self.bin_centers.size < 2:
            raise ValueError("bin width undefined for a single bin")
        return float(self.bin_centers[1] - self.bin_centers[0])


@dataclass
class CorrelationHistogram:
    """Normalized intensity autocorrelation g2(tau).

    tau_bins: bin centers in ns, symmetric about zero.
    coincidence_counts: raw pair counts per bin.
    normalization: expected uncorrelated pair count per bin.
    """

    tau_bins: np.ndarray
    g2: np.ndarray
    coincidence_counts: np.ndarray
    normalization: float

    def __post_init__(self):
        self.tau_bins = _column(self.tau_bins, "tau_bins")
        self.g2 = _column(self.g2, "g2")
        self.coincidence_counts = np.asarray(self.coincidence_counts)
        if not (self.tau_bins.size == self.g2.size == self.coincidence_counts.size):
            raise ValueError("tau_bins, g2 and coincidence_counts differ in length")
        if not np.allclose(self.tau_bins, -self.tau_bins[::-1]):
            raise ValueError("tau_bins must be symmetric about zero")
        if np.any(self.g2 < 0):
            raise ValueError("g2 must be >= 0")
        if self.normalization <= 0:
            raise ValueError("normalization must be positive")

    def __len__(self) -> int:
        return self.tau_bins.size


@dataclass
class FitReport:
    """Result of one parameter estimation.

    params/std_errors map bare parameter names to values; ``units`` maps the
    same names to unit strings. ``std_errors`` is None when the covariance
    estimate was not positive-definite. ``derived`` holds quantities computed
    from the fitted parameters (e.g. a transform limit).
    """

    model: str
    params: dict
    units: dict
    std_errors: dict | None
    reduced_chi2: float
    n_iterations: int
    converged: bool
    warnings: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    input_digest: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "units": dict(self.units),
            "std_errors": None if self.std_errors is None else dict(self.std_errors),
            "reduced_chi2": self.reduced_chi2,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "warnings": list(self.warnings),
            "derived": dict(self.derived),
            "input_digest": self.input_digest,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(
            model=d["model"], params=dict(d["params"]), units=dict(d["units"]),
            std_errors=None if d["std_errors"] is None else dict(d["std_errors"]),
            reduced_chi2=d["reduced_chi2"], n_iterations=d["n_iterations"],
            converged=d["converged"], warnings=list(d["warnings"]),
            derived=dict(d.get("derived", {})),
            input_digest=d.get("input_digest", ""),
        )
