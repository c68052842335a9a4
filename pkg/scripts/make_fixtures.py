#!/usr/bin/env python3
"""Regenerate the bundled example data in fixtures/.

Everything is seeded, so re-running reproduces the committed files
byte for byte.
"""

from pathlib import Path

import numpy as np

import g4vlines as g
from g4vlines import dataio

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

PLE_SEED = 20240817
TRPL_SEED = 7


def main():
    FIXTURES.mkdir(exist_ok=True)
    pbv = g.REGISTRY.get("PbV")

    # single PLE scan of a PbV-like line at 6.2 K, ~1000 counts on peak
    cfg = g.ScanSeriesConfig(
        emitter=pbv, temperature=6.2,
        grid=g.FrequencyGrid(-150.0, 150.0, 2.0),
        dwell=0.2, peak_rate=5000.0, background_rate=50.0,
        seed=PLE_SEED)
    dataio.save_spectrum(g.simulate_ple_scan(cfg), FIXTURES / "ple_pbv.csv")

    # GeV-like decay: 5.5 ns radiative component over a fast background
    trace = g.simulate_trpl(
        5.5, 2_000_000, bin_width=0.1, t_max=60.0,
        background=g.TrplBackground(a_fast=6.0, tau_fast=0.5),
        seed=TRPL_SEED)
    dataio.save_decay_trace(trace, FIXTURES / "trpl_gev.csv")

    # measured GeV difference plus the modelled PbV one
    (FIXTURES / "alpha_points.csv").write_text(
        "splitting_ghz,delta_mhz\n"
        "200.0,44.7\n"
        "3870.0,435300.0\n", encoding="utf-8")

    # noiseless PbV linewidth-vs-temperature series
    temps = np.arange(6.0, 19.0, 2.0)
    widths = g.linewidth_c(pbv, temps)
    lines = ["temperature_k,linewidth_mhz"]
    lines += [f"{repr(float(t))},{repr(float(w))}" for t, w in zip(temps, widths)]
    (FIXTURES / "tempseries_pbv.csv").write_text("\n".join(lines) + "\n",
                                                 encoding="utf-8")

    dataio.save_emitter_file(pbv, FIXTURES / "emitter_pbv.json")

    for f in sorted(FIXTURES.iterdir()):
        print(f"wrote {f}")


if __name__ == "__main__":
    main()
