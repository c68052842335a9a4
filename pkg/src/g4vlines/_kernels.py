"""Coincidence-counting kernel: the one genuinely hot inner loop.

Two interchangeable implementations of the sliding-window pair histogram:
a numba @njit loop (default) and a pure-numpy searchsorted fallback.
Selection: set G4VLINES_NUMBA=0 (or "false"/"off") to force the numpy path;
it is also used automatically when numba fails to import. Per-call override
via the ``impl`` argument, used by benchmarks/bench_correlator.py.

Bin convention: 2*m_max + 1 bins centered at m*bin_width for
m = -m_max..m_max, each covering [(m-0.5)*w, (m+0.5)*w).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["coincidence_histogram", "default_impl"]


def _env_wants_numba() -> bool:
    return os.environ.get("G4VLINES_NUMBA", "1").lower() not in ("0", "false", "off")


try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    _HAVE_NUMBA = False


def default_impl() -> str:
    return "numba" if (_HAVE_NUMBA and _env_wants_numba()) else "numpy"


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pairs_numba(a, b, bin_width, m_max):  # pragma: no cover - jitted
        hist = np.zeros(2 * m_max + 1, dtype=np.int64)
        edge = (m_max + 0.5) * bin_width
        j_lo = 0
        for i in range(a.size):
            t = a[i]
            lo = t - edge
            while j_lo < b.size and b[j_lo] < lo:
                j_lo += 1
            j = j_lo
            while j < b.size and b[j] - t < edge:
                m = int(np.floor((b[j] - t) / bin_width + 0.5))
                if -m_max <= m <= m_max:
                    hist[m + m_max] += 1
                j += 1
        return hist


def _pairs_numpy(a, b, bin_width, m_max):
    # cumulative counts below every bin edge, vectorized over all of a
    below = np.empty(2 * m_max + 2, dtype=np.int64)
    for k, m in enumerate(range(-m_max, m_max + 2)):
        below[k] = np.searchsorted(b, a + (m - 0.5) * bin_width, side="left").sum()
    return np.diff(below)


def coincidence_histogram(times_a, times_b, bin_width: float, m_max: int,
                          impl: str | None = None) -> np.ndarray:
    """Histogram of pair separations t_b - t_a within +-(m_max+0.5)*bin_width.

    Both time arrays must be sorted ascending. Counts every ordered pair
    (full correlation, not start-stop). Pass ``times_a is times_b`` data for
    an autocorrelation and subtract the self-pairs from the center bin at
    the call site.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    a = np.ascontiguousarray(times_a, dtype=np.float64)
    b = np.ascontiguousarray(times_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        return np.zeros(2 * m_max + 1, dtype=np.int64)
    impl = impl or default_impl()
    if impl == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("numba implementation requested but unavailable")
        return _pairs_numba(a, b, float(bin_width), int(m_max))
    if impl == "numpy":
        return _pairs_numpy(a, b, float(bin_width), int(m_max))
    raise ValueError(f"impl must be 'numba' or 'numpy', got {impl!r}")
