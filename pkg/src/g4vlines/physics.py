"""Single-phonon relaxation model for the optical lines of group-IV centers.

The C- and D-transitions share the transform limit and residual broadening;
they differ through the ground-state phonon terms: the C-line picks up
phonon *absorption* across the ground-state splitting, the D-line phonon
*emission*, so the D-line is broader by alpha~ * f_gs^3 at any temperature.

All functions are pure and accept scalars or numpy arrays (broadcasting);
frequencies in GHz, temperatures in K, linewidths in MHz.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import H_OVER_KB_K_PER_GHZ
from .emitters import EmitterParams, transform_limit_mhz

__all__ = [
    "bose_occupation", "phonon_rates", "PhononRates",
    "linewidth_c", "linewidth_d", "linewidth_difference",
    "transform_limit", "lifetime_from_linewidth",
    "temperature_threshold", "lorentzian",
    "linewidth_breakdown", "LinewidthBreakdown",
    "NegativeLinewidthWarning", "VALIDITY_TEMP_LIMIT_K",
]

# Above this temperature the single-phonon picture starts to miss
# higher-order electron-phonon contributions; results are tagged.
VALIDITY_TEMP_LIMIT_K = 20.0

FLAG_BEYOND_VALIDITY = "beyond_single_phonon_validity"
FLAG_NEGATIVE_TOTAL = "negative_total_linewidth"


class NegativeLinewidthWarning(UserWarning):
    """A negative gamma_others drove a total linewidth below zero."""


def _scalar_like(value, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


def bose_occupation(f_ghz, temp_k):
    """Mean thermal phonon number n(f, T) = 1/(exp(h f / kB T) - 1).

    Exactly 0 at T = 0. Overflow-safe for arbitrarily large h f / kB T
    (underflows smoothly to 0) and accurate for arbitrarily small exponents
    (expm1 keeps full precision where the naive form would cancel).

    Parameters
    ----------
    f_ghz : float or array
        Phonon frequency in GHz (ordinary frequency), > 0.
    temp_k : float or array
        Temperature in K, >= 0.
    """
    f = np.asarray(f_ghz, dtype=float)
    T = np.asarray(temp_k, dtype=float)
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise ValueError("f_ghz must be positive and finite")
    if np.any(T < 0) or np.any(np.isnan(T)):
        raise ValueError("temp_k must be >= 0")

    with np.errstate(divide="ignore", over="ignore"):
        x = H_OVER_KB_K_PER_GHZ * f / T          # T = 0 -> inf -> n = 0
        n = np.where(x > 350.0,
                     np.exp(-x),
                     1.0 / np.expm1(np.minimum(x, 360.0)))
    return _scalar_like(n, f_ghz, temp_k)


@dataclass(frozen=True)
class PhononRates:
    """Single-phonon absorption/emission rates across a splitting, in MHz.

    gamma_down - gamma_up = alpha * f^3 exactly, independent of temperature,
    and gamma_up/gamma_down = exp(-h f / kB T) (detailed balance).
    """

    gamma_up: float
    gamma_down: float


def phonon_rates(f_split_ghz, temp_k, alpha):
    """Rates for phonon absorption (up) and emission (down) in MHz.

    ``alpha`` is the reduced coupling (GHz^-2): the rates are
    alpha * f^3 * n and alpha * f^3 * (n + 1), converted GHz -> MHz.
    """
    if np.ndim(alpha) == 0 and alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    n = bose_occupation(f_split_ghz, temp_k)
    scale = alpha * np.asarray(f_split_ghz, dtype=float) ** 3 * 1e3
    up = scale * n
    down = scale * (n + 1.0)
    if np.ndim(up) == 0:
        return PhononRates(float(up), float(down))
    return PhononRates(up, down)


def _phonon_up_mhz(f_ghz, temp_k, alpha):
    return alpha * np.asarray(f_ghz, dtype=float) ** 3 * 1e3 * bose_occupation(f_ghz, temp_k)


def linewidth_c(p: EmitterParams, temp_k):
    """FWHM of the C-transition (MHz) at temperature temp_k.

    gamma0 + gamma_others + phonon absorption in both manifolds.
    """
    total = (p.gamma0 + p.gamma_others
             + _phonon_up_mhz(p.f_gs, temp_k, p.alpha_gs)
             + _phonon_up_mhz(p.f_es, temp_k, p.alpha_es))
    if np.any(np.asarray(total) < 0):
        warnings.warn(
            f"total C-linewidth negative for {p.name} (gamma_others = "
            f"{p.gamma_others} MHz)", NegativeLinewidthWarning, stacklevel=2)
    return _scalar_like(total, temp_k)


def linewidth_d(p: EmitterParams, temp_k):
    """FWHM of the D-transition (MHz): ground-state term is phonon *emission*."""
    n_gs = bose_occupation(p.f_gs, temp_k)
    total = (p.gamma0 + p.gamma_others
             + p.alpha_gs * p.f_gs ** 3 * 1e3 * (n_gs + 1.0)
             + _phonon_up_mhz(p.f_es, temp_k, p.alpha_es))
    if np.any(np.asarray(total) < 0):
        warnings.warn(
            f"total D-linewidth negative for {p.name} (gamma_others = "
            f"{p.gamma_others} MHz)", NegativeLinewidthWarning, stacklevel=2)
    return _scalar_like(total, temp_k)


def linewidth_difference(p: EmitterParams) -> float:
    """Temperature-independent D-C linewidth difference alpha~ * f_gs^3, MHz."""
    return p.alpha_gs * p.f_gs ** 3 * 1e3


def transform_limit(lifetime_ns: float) -> float:
    """Transform-limited FWHM (MHz) of a radiative lifetime (ns)."""
    return transform_limit_mhz(lifetime_ns)


def lifetime_from_linewidth(fwhm_mhz: float) -> float:
    """Radiative lifetime (ns) implied by a transform-limited FWHM (MHz)."""
    if fwhm_mhz <= 0:
        raise ValueError(f"fwhm must be positive, got {fwhm_mhz}")
    return 1e3 / (2.0 * math.pi * fwhm_mhz)


def temperature_threshold(p: EmitterParams, ratio: float = 1.2) -> float:
    """Temperature at which the C-linewidth reaches ratio * gamma0.

    Solved by bisection to 1 mK absolute; the upper bracket starts at 400 K
    and doubles until it encloses the root. Returns 0.0 when the criterion
    is already violated at T = 0 (gamma_others >= (ratio-1) * gamma0) and
    ``math.inf`` when it can never be violated (both phonon couplings zero
    and gamma_others below the margin).
    """
    if ratio <= 1.0:
        raise ValueError(f"ratio must exceed 1, got {ratio}")
    target = ratio * p.gamma0

    def excess(T):
        return linewidth_c(p, T) - target

    if excess(0.0) >= 0.0:
        return 0.0
    if p.alpha_gs * p.f_gs ** 3 + p.alpha_es * p.f_es ** 3 == 0.0:
        return math.inf  # linewidth is temperature-independent

    hi = 400.0
    while excess(hi) < 0.0:
        hi *= 2.0
        if not math.isfinite(hi):
            return math.inf
    lo = 0.0
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lorentzian(detuning_mhz, center_mhz, fwhm_mhz, amplitude, offset):
    """Lorentzian line profile: offset + amplitude at the peak.

    offset + amplitude * (w/2)^2 / ((detuning - center)^2 + (w/2)^2)
    """
    if np.any(np.asarray(fwhm_mhz) <= 0):
        raise ValueError(f"fwhm must be positive, got {fwhm_mhz}")
    if np.any(np.asarray(amplitude) < 0) or np.any(np.asarray(offset) < 0):
        raise ValueError("amplitude and offset must be >= 0")
    hwhm2 = (np.asarray(fwhm_mhz, dtype=float) / 2.0) ** 2
    d = np.asarray(detuning_mhz, dtype=float) - center_mhz
    value = offset + amplitude * hwhm2 / (d * d + hwhm2)
    return _scalar_like(value, detuning_mhz, center_mhz, fwhm_mhz, amplitude, offset)


@dataclass(frozen=True)
class LinewidthBreakdown:
    """Per-term decomposition of a predicted linewidth, with validity flags."""

    emitter: str
    transition: str
    temperature_k: float
    gamma0_mhz: float
    gamma_others_mhz: float
    gs_phonon_mhz: float
    es_phonon_mhz: float
    total_mhz: float
    flags: tuple[str, ...]


def linewidth_breakdown(p: EmitterParams, temp_k: float,
                        transition: str = "c") -> LinewidthBreakdown:
    """Decompose linewidth_c / linewidth_d into its four terms.

    Queries above 20 K are answered but flagged beyond_single_phonon_validity.
    """
    transition = transition.lower()
    if transition not in ("c", "d"):
        raise ValueError(f"transition must be 'c' or 'd', got {transition!r}")
    gs_rates = phonon_rates(p.f_gs, temp_k, p.alpha_gs)
    gs = gs_rates.gamma_up if transition == "c" else gs_rates.gamma_down
    es = phonon_rates(p.f_es, temp_k, p.alpha_es).gamma_up
    total = p.gamma0 + p.gamma_others + gs + es
    flags = []
    if temp_k > VALIDITY_TEMP_LIMIT_K:
        flags.append(FLAG_BEYOND_VALIDITY)
    if total < 0:
        flags.append(FLAG_NEGATIVE_TOTAL)
    return LinewidthBreakdown(
        emitter=p.name, transition=transition, temperature_k=float(temp_k),
        gamma0_mhz=p.gamma0, gamma_others_mhz=p.gamma_others,
        gs_phonon_mhz=gs, es_phonon_mhz=es, total_mhz=total,
        flags=tuple(flags))
