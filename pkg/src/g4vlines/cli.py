"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 model-domain error
(threshold never reached), 4 fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, dataio, fitting, physics, simulate
from .emitters import PRESET_NOTES, REGISTRY, EmitterParams
from .records import FitReport

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_NOT_CONVERGED = 4

OUTDIR_ENV = "G4VLINES_OUTDIR"

EVENTS_HEADER = "scan_index,point_index,time_s,kind,center_mhz"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _resolve_emitter(name_or_path: str) -> EmitterParams:
    """Interpret --emitter as a file path when one exists, else a preset name."""
    if os.path.exists(name_or_path):
        return dataio.load_emitter_file(name_or_path)
    return REGISTRY.get(name_or_path)


def _print_rows(rows, fmt: str) -> None:
    if fmt == "csv":
        print(",".join(key for key, _ in rows))
        print(",".join(str(val) for _, val in rows))
    else:
        width = max(len(key) for key, _ in rows)
        for key, val in rows:
            print(f"{key:<{width}}  {val}")


# ---------------------------------------------------------------------------
# predict / threshold / emitters

def _cmd_predict(args) -> int:
    emitter = _resolve_emitter(args.emitter)
    if args.temp < 0:
        return _fail("--temp must be >= 0")
    b = physics.linewidth_breakdown(emitter, args.temp, args.transition)
    rows = [
        ("emitter", b.emitter),
        ("transition", b.transition.upper()),
        ("temperature_k", b.temperature_k),
        ("gamma0_mhz", b.gamma0_mhz),
        ("gamma_others_mhz", b.gamma_others_mhz),
        ("gs_phonon_mhz", b.gs_phonon_mhz),
        ("es_phonon_mhz", b.es_phonon_mhz),
        ("total_mhz", b.total_mhz),
        ("validity", "+".join(b.flags) if b.flags else "ok"),
    ]
    _print_rows(rows, args.format)
    return EXIT_OK


def _cmd_threshold(args) -> int:
    emitter = _resolve_emitter(args.emitter)
    if args.ratio <= 1.0:
        return _fail("--ratio must exceed 1")
    t_star = physics.temperature_threshold(emitter, args.ratio)
    if math.isinf(t_star):
        print("criterion never violated: linewidth stays below "
              f"{args.ratio} x gamma0 at all temperatures", file=sys.stderr)
        return EXIT_DOMAIN
    rows = [("emitter", emitter.name), ("ratio", args.ratio),
            ("threshold_k", round(t_star, 4))]
    _print_rows(rows, args.format)
    return EXIT_OK


def _cmd_emitters(args) -> int:
    if args.action == "list":
        cols = ("name", "f_gs_ghz", "f_es_ghz", "lifetime_ns", "gamma0_mhz",
                "alpha_gs", "alpha_es", "gamma_others_mhz")
        print(f"{'name':<6} {'f_gs_ghz':>9} {'f_es_ghz':>9} {'lifetime_ns':>12} "
              f"{'gamma0_mhz':>11} {'alpha_gs':>10} {'alpha_es':>10} "
              f"{'gamma_others_mhz':>17}")
        for name in REGISTRY.names():
            p = REGISTRY.get(name)
            print(f"{p.name:<6} {p.f_gs:>9g} {p.f_es:>9g} {p.lifetime:>12.4f} "
                  f"{p.gamma0:>11.4g} {p.alpha_gs:>10.3g} {p.alpha_es:>10.3g} "
                  f"{p.gamma_others:>17g}")
        return EXIT_OK
    p = REGISTRY.get(args.name)
    for key, val in p.to_dict().items():
        print(f"{key:<13} {val}")
    note = PRESET_NOTES.get(p.name)
    if note:
        print(f"{'note':<13} {note}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit

def _print_fit_summary(report: FitReport) -> None:
    print(f"model      {report.model}")
    print(f"converged  {report.converged}  ({report.n_iterations} iterations)")
    for name, value in report.params.items():
        unit = report.units.get(name, "")
        if report.std_errors is not None:
            print(f"{name:<10} {value:.6g} +/- {report.std_errors[name]:.3g} {unit}")
        else:
            print(f"{name:<10} {value:.6g} {unit}")
    print(f"reduced_chi2 {report.reduced_chi2:.4g}")
    for name, value in report.derived.items():
        print(f"{name:<10} {value:.6g}")
    for w in report.warnings:
        print(f"warning: {w}")


def _finish_fit(report: FitReport, out_path) -> int:
    dataio.emit_fit_report(report, out_path)
    _print_fit_summary(report)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_fit(args) -> int:
    if args.what == "ple":
        spectrum = dataio.load_spectrum(args.infile)
        report = fitting.fit_lorentzian(spectrum, max_iter=args.max_iter)
    elif args.what == "lifetime":
        trace = dataio.load_decay_trace(args.infile)
        report = fitting.fit_decay(trace, args.model, max_iter=args.max_iter)
    elif args.what == "alpha":
        points = dataio.load_alpha_points(args.infile)
        report = fitting.fit_cubic_alpha(points, weights=args.weights)
    else:  # tempseries
        if args.emitter is None:
            return _fail("fit tempseries requires --emitter")
        emitter = _resolve_emitter(args.emitter)
        points = dataio.load_temperature_series(args.infile)
        free = tuple(args.free.split(","))
        report = fitting.fit_temperature_series(points, emitter, free=free,
                                                max_temp=args.max_temp)
    return _finish_fit(report, args.out)


# ---------------------------------------------------------------------------
# simulate

def _cfg_get(cfg: dict, key: str, caster, required=True, default=None):
    if key not in cfg:
        if required:
            raise ValueError(f"config error at {key!r}: missing required field")
        return default
    try:
        return caster(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"config error at {key!r}: {exc}") from None


def _scan_config(cfg: dict, seed_override) -> simulate.ScanSeriesConfig:
    emitter_spec = cfg.get("emitter")
    if emitter_spec is None:
        raise ValueError("config error at 'emitter': missing required field")
    if isinstance(emitter_spec, dict):
        emitter = EmitterParams.from_dict(emitter_spec)
    else:
        emitter = _resolve_emitter(str(emitter_spec))
    grid_spec = _cfg_get(cfg, "grid_mhz", dict)
    try:
        grid = simulate.FrequencyGrid(float(grid_spec["start"]),
                                      float(grid_spec["stop"]),
                                      float(grid_spec["step"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"config error at 'grid_mhz': {exc}") from None
    seed = seed_override if seed_override is not None \
        else _cfg_get(cfg, "seed", int, required=False, default=0)
    return simulate.ScanSeriesConfig(
        emitter=emitter,
        temperature=_cfg_get(cfg, "temperature_k", float),
        grid=grid,
        dwell=_cfg_get(cfg, "dwell_s", float),
        peak_rate=_cfg_get(cfg, "peak_rate", float),
        background_rate=_cfg_get(cfg, "background_rate", float),
        n_scans=_cfg_get(cfg, "n_scans", int, required=False, default=1),
        center0=_cfg_get(cfg, "center0_mhz", float, required=False, default=0.0),
        diffusion_sigma=_cfg_get(cfg, "diffusion_sigma_mhz", float,
                                 required=False, default=0.0),
        jump_prob=_cfg_get(cfg, "jump_prob", float, required=False, default=0.0),
        jump_sigma=_cfg_get(cfg, "jump_sigma_mhz", float, required=False, default=0.0),
        ionization_coeff=_cfg_get(cfg, "ionization_coeff", float,
                                  required=False, default=0.0),
        repump=_cfg_get(cfg, "repump", str, required=False, default="none"),
        repump_rate=_cfg_get(cfg, "repump_rate", float, required=False, default=0.0),
        seed=seed,
        noiseless=bool(cfg.get("noiseless", False)),
    )


def _write_events(events, path) -> None:
    lines = [EVENTS_HEADER]
    for ev in events:
        lines.append(f"{ev.scan_index},{ev.point_index},{ev.time_s!r},"
                     f"{ev.kind},{ev.center_mhz!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _svg_lineplot(path, x, y, xlabel, ylabel) -> None:
    """Minimal self-contained SVG polyline plot (no external renderer)."""
    width, height, margin = 640, 420, 56
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = (width - 2 * margin) / (x1 - x0)
    sy = (height - 2 * margin) / (y1 - y0)
    pts = " ".join(f"{margin + (a - x0) * sx:.2f},{height - margin - (b - y0) * sy:.2f}"
                   for a, b in zip(x, y))
    svg = f"""<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">
<rect width="{width}" height="{height}" fill="white"/>
<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}"
 fill="none" stroke="black"/>
<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.2"/>
<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="13">{xlabel}</text>
<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="13"
 transform="rotate(-90 14 {height / 2:.0f})">{ylabel}</text>
<text x="{margin}" y="{height - margin + 16}" font-size="11">{x0:.6g}</text>
<text x="{width - margin}" y="{height - margin + 16}" text-anchor="end" font-size="11">{x1:.6g}</text>
<text x="{margin - 4}" y="{height - margin}" text-anchor="end" font-size="11">{y0:.6g}</text>
<text x="{margin - 4}" y="{margin + 4}" text-anchor="end" font-size="11">{y1:.6g}</text>
</svg>
"""
    Path(path).write_text(svg, encoding="utf-8")


def _cmd_simulate(args) -> int:
    out_dir = args.out or os.environ.get(OUTDIR_ENV)
    if not out_dir:
        return _fail(f"no output directory: pass --out or set {OUTDIR_ENV}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)

    outputs: list[str] = []
    plots: list[tuple] = []
    if args.what in ("ple", "series"):
        scan_cfg = _scan_config(cfg, args.seed)
        seed = scan_cfg.seed
        if args.what == "ple":
            spectrum = simulate.simulate_ple_scan(scan_cfg)
            dataio.save_spectrum(spectrum, out / "scan.csv")
            outputs.append("scan.csv")
            plots.append(("scan.svg", spectrum.detunings, spectrum.counts,
                          "detuning (MHz)", "counts"))
        else:
            spectra, events = simulate.simulate_scan_series(scan_cfg)
            for spec in spectra:
                name = f"scan_{spec.meta['scan_index']:03d}.csv"
                dataio.save_spectrum(spec, out / name)
                outputs.append(name)
            _write_events(events, out / "events.csv")
            outputs.append("events.csv")
            stacked = np.mean([s.counts for s in spectra], axis=0)
            plots.append(("scan_mean.svg", spectra[0].detunings, stacked,
                          "detuning (MHz)", "mean counts"))
    elif args.what == "trpl":
        seed = args.seed if args.seed is not None \
            else _cfg_get(cfg, "seed", int, required=False, default=0)
        bg_spec = cfg.get("background")
        background = None
        if bg_spec is not None:
            try:
                background = simulate.TrplBackground(float(bg_spec["a_fast"]),
                                                     float(bg_spec["tau_fast_ns"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"config error at 'background': {exc}") from None
        trace = simulate.simulate_trpl(
            _cfg_get(cfg, "lifetime_ns", float),
            _cfg_get(cfg, "counts_total", int),
            bin_width=_cfg_get(cfg, "bin_width_ns", float),
            t_max=_cfg_get(cfg, "t_max_ns", float),
            background=background, seed=seed)
        dataio.save_decay_trace(trace, out / "trace.csv")
        outputs.append("trace.csv")
        plots.append(("trace.svg", trace.bin_centers, trace.counts,
                      "time (ns)", "counts"))
    else:  # hbt
        seed = args.seed if args.seed is not None \
            else _cfg_get(cfg, "seed", int, required=False, default=0)
        hist = simulate.simulate_hbt(
            _cfg_get(cfg, "rate", float),
            _cfg_get(cfg, "lifetime_ns", float),
            _cfg_get(cfg, "purity_rho", float),
            _cfg_get(cfg, "duration_s", float),
            bin_width=_cfg_get(cfg, "bin_width_ns", float),
            tau_max=_cfg_get(cfg, "tau_max_ns", float),
            seed=seed)
        dataio.save_correlation(hist, out / "g2.csv")
        outputs.append("g2.csv")
        plots.append(("g2.svg", hist.tau_bins, hist.g2, "tau (ns)", "g2"))

    if args.svg:
        for name, x, y, xl, yl in plots:
            _svg_lineplot(out / name, x, y, xl, yl)
            outputs.append(name)

    manifest = {"subcommand": f"simulate {args.what}", "config": cfg,
                "seed": seed, "toolkit_version": __version__,
                "outputs": outputs}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                       encoding="utf-8")
    print(f"wrote {', '.join(outputs)} and manifest.json to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="g4vlines",
        description="Phonon-limited linewidths, lineshape fits and photon "
                    "statistics for group-IV vacancy centers in diamond.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="linewidth terms at a temperature")
    p.add_argument("--emitter", required=True, help="preset name or JSON file")
    p.add_argument("--temp", type=float, required=True, help="temperature in K")
    p.add_argument("--transition", choices=("c", "d"), default="c")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("threshold",
                       help="temperature where the C-line reaches ratio x gamma0")
    p.add_argument("--emitter", required=True)
    p.add_argument("--ratio", type=float, default=1.2)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("fit", help="fit a data file, write a JSON report")
    p.add_argument("what", choices=("ple", "lifetime", "alpha", "tempseries"))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--model", choices=("exp1", "exp2"), default="exp1",
                   help="decay model (fit lifetime)")
    p.add_argument("--weights", choices=("delta", "equal"), default="delta",
                   help="weighting of the cubic-law fit (fit alpha)")
    p.add_argument("--emitter", help="emitter for fit tempseries")
    p.add_argument("--free", default="gamma_others",
                   help="comma list: gamma_others[,alpha_gs]")
    p.add_argument("--max-temp", type=float, default=None,
                   help="ignore tempseries points above this temperature")
    p.add_argument("--max-iter", type=int, default=fitting.MAX_ITERATIONS)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("simulate", help="run a seeded synthetic experiment")
    p.add_argument("what", choices=("ple", "series", "trpl", "hbt"))
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV})")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--svg", action="store_true", help="also render line plots")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("emitters", help="list or show builtin presets")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("name", nargs="?", help="emitter name (show)")
    p.set_defaults(func=_cmd_emitters)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "emitters" and args.action == "show" and not args.name:
        return _fail("emitters show requires a name")
    try:
        return args.func(args)
    except (dataio.DataFormatError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        return _fail(str(msg))
    except OSError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
