"""File formats: CSV for array data, JSON for records and configs.

CSV files carry optional ``# key=value`` comment lines before the header;
floats are written with repr() (shortest exact representation), so
save -> load round-trips are lossless. Known metadata keys are coerced to
their natural types on load, everything else stays a string.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .emitters import EmitterParams
from .records import CorrelationHistogram, DecayTrace, FitReport, Spectrum

__all__ = [
    "load_spectrum", "save_spectrum",
    "load_decay_trace", "save_decay_trace",
    "save_correlation", "load_correlation",
    "emit_fit_report", "load_fit_report",
    "load_emitter_file", "save_emitter_file",
    "load_alpha_points", "load_temperature_series",
    "DataFormatError",
]

SPECTRUM_HEADER = "detuning_mhz,counts"
DECAY_HEADER = "time_ns,counts"
CORRELATION_HEADER = "tau_ns,g2,coincidences"
ALPHA_HEADER = "splitting_ghz,delta_mhz"
TEMPSERIES_HEADER = "temperature_k,linewidth_mhz"

_META_TYPES = {
    "temperature_k": float, "power_nw": float, "scan_index": int,
    "seed": int, "bin_width_ns": float, "center_mhz": float,
    "normalization": float,
}


class DataFormatError(ValueError):
    """A file does not conform to one of the documented formats."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_csv(path, header: str, n_cols: int):
    """Return (meta, columns, row line numbers); errors carry line numbers."""
    path = Path(path)
    meta: dict = {}
    rows = []
    linenos = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    key = key.strip()
                    caster = _META_TYPES.get(key, str)
                    try:
                        meta[key] = caster(value.strip())
                    except ValueError:
                        meta[key] = value.strip()
                continue
            if not header_seen:
                if line != header:
                    raise DataFormatError(
                        f"{path}:{lineno}: expected header {header!r}, "
                        f"got {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {n_cols} comma-separated "
                    f"values, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            linenos.append(lineno)
    if not header_seen:
        raise DataFormatError(f"{path}: missing header line {header!r}")
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    cols = np.asarray(rows, dtype=float).T
    return meta, cols, linenos


def _write_csv(path, header: str, columns, meta: dict | None) -> None:
    path = Path(path)
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(header)
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Spectra and decay traces

def save_spectrum(spectrum: Spectrum, path) -> None:
    _write_csv(path, SPECTRUM_HEADER,
               (spectrum.detunings, spectrum.counts), spectrum.meta)


def load_spectrum(path) -> Spectrum:
    meta, (detunings, counts), linenos = _parse_csv(path, SPECTRUM_HEADER, 2)
    if np.any(np.diff(detunings) <= 0):
        bad = int(np.nonzero(np.diff(detunings) <= 0)[0][0])
        raise DataFormatError(
            f"{path}:{linenos[bad + 1]}: non-monotonic detunings")
    try:
        return Spectrum(detunings, counts, meta)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def save_decay_trace(trace: DecayTrace, path) -> None:
    _write_csv(path, DECAY_HEADER, (trace.bin_centers, trace.counts), trace.meta)


def load_decay_trace(path) -> DecayTrace:
    meta, (times, counts), _ = _parse_csv(path, DECAY_HEADER, 2)
    try:
        return DecayTrace(times, counts, meta)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def save_correlation(hist: CorrelationHistogram, path) -> None:
    _write_csv(path, CORRELATION_HEADER,
               (hist.tau_bins, hist.g2, hist.coincidence_counts),
               {"normalization": hist.normalization})


def load_correlation(path) -> CorrelationHistogram:
    meta, (tau, g2, counts), _ = _parse_csv(path, CORRELATION_HEADER, 3)
    if "normalization" not in meta:
        raise DataFormatError(f"{path}: missing '# normalization=' line")
    try:
        return CorrelationHistogram(tau, g2, counts.astype(np.int64),
                                    meta["normalization"])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Fit reports

def emit_fit_report(report: FitReport, path) -> None:
    """Write a fit report as JSON (floats keep full precision)."""
    payload = report.to_dict()
    payload["toolkit_version"] = __version__
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_fit_report(path) -> FitReport:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return FitReport.from_dict(payload)


# ---------------------------------------------------------------------------
# Emitter parameter files

def save_emitter_file(params: EmitterParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n",
                          encoding="utf-8")


def load_emitter_file(path) -> EmitterParams:
    """Load and validate an emitter parameter JSON file.

    All EmitterParams invariants are enforced here, including the 1%
    gamma0/lifetime consistency requirement.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise DataFormatError(f"{path}: expected a JSON object")
    try:
        return EmitterParams.from_dict(payload)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Small two-column inputs for the alpha and temperature-series fits

def load_alpha_points(path) -> np.ndarray:
    """(splitting_ghz, delta_mhz) rows for fit_cubic_alpha."""
    _, cols, _ = _parse_csv(path, ALPHA_HEADER, 2)
    return cols.T


def load_temperature_series(path) -> np.ndarray:
    """(temperature_k, linewidth_mhz) rows for fit_temperature_series."""
    _, cols, _ = _parse_csv(path, TEMPSERIES_HEADER, 2)
    return cols.T
