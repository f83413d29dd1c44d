"""Command-line entry point.

Subcommands: ``jsi`` (synthesize or ingest a joint spectrum and report its
Schmidt modes), ``curve`` (g2 versus mean pair number in both detector
configurations), ``simulate`` (tag-stream generation), ``count``
(coincidence counting) and ``fit`` (parameter recovery).  Every command
writes a manifest recording the resolved parameters so a run can be
reproduced; outputs are written atomically.

Exit codes: 0 success, 2 usage error, 3 numeric or contract error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .errors import HeraldError, ParameterError
from . import jsi as jsi_mod
from .fitting import estimate_efficiencies, fit_mu, fit_tree_depth
from .model import ModelParams, g2, mu_for_g2
from .tags import (
    GeneratorTiming,
    RunConfig,
    count_coincidences,
    g2_from_counts,
    generate_run,
    read_counts_json,
    read_tags_binary,
    read_tags_csv,
    write_counts_json,
    write_tags_binary,
    write_tags_csv,
)


def _atomic_write(path: str, writer) -> None:
    tmp = f"{path}.tmp"
    writer(tmp)
    os.replace(tmp, path)


def _write_json(path: str, payload: dict) -> None:
    def w(tmp):
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    _atomic_write(path, w)


def _write_manifest(outdir: str, command: str, args: argparse.Namespace, outputs) -> str:
    params = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")
    }
    manifest = {
        "command": command,
        "version": __version__,
        "parameters": params,
        "seed": params.get("seed"),
        "outputs": sorted(outputs),
    }
    path = os.path.join(outdir, f"{command}_manifest.json")
    _write_json(path, manifest)
    return path


def _load_config(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment.  Flags win over these."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _spectrum_from_args(args) -> jsi_mod.SchmidtSpectrum:
    if getattr(args, "single_mode", False):
        return jsi_mod.SchmidtSpectrum.single_mode()
    if getattr(args, "spectrum", None):
        return jsi_mod.read_spectrum_csv(args.spectrum)
    grid = jsi_mod.synthesize_jsi()
    return jsi_mod.schmidt_decompose(grid)


# ---------------------------------------------------------------------- jsi

def _cmd_jsi(args) -> int:
    os.makedirs(args.output_dir, exist_ok=True)
    if args.ingest:
        grid = jsi_mod.read_jsi_csv(args.ingest)
    elif args.separable:
        grid = jsi_mod.separable_jsi(grid_size=args.grid)
    else:
        grid = jsi_mod.synthesize_jsi(
            pump_center_nm=args.pump_center,
            pump_bandwidth_nm=args.pump_bandwidth,
            phasematch_bandwidth_nm=args.phasematch_bandwidth,
            signal_band_nm=tuple(args.signal_band),
            idler_band_nm=tuple(args.idler_band),
            grid_size=args.grid,
        )
    spectrum = jsi_mod.schmidt_decompose(grid, cutoff=args.cutoff)
    grid_path = os.path.join(args.output_dir, "jsi_grid.csv")
    spec_path = os.path.join(args.output_dir, "schmidt_spectrum.csv")
    _atomic_write(grid_path, lambda p: jsi_mod.write_jsi_csv(grid, p))
    _atomic_write(spec_path, lambda p: jsi_mod.write_spectrum_csv(spectrum, p))
    _write_manifest(args.output_dir, "jsi", args, ["jsi_grid.csv", "schmidt_spectrum.csv"])
    print(f"schmidt_number {spectrum.schmidt_number:.4f} modes {len(spectrum)}")
    return 0


# -------------------------------------------------------------------- curve

def _cmd_curve(args) -> int:
    os.makedirs(args.output_dir, exist_ok=True)
    spectrum = _spectrum_from_args(args)
    params = ModelParams(
        mu=args.mu_min,
        eta_i=args.eta_i,
        eta_s1=args.eta_s1,
        eta_s2=args.eta_s2,
        k=args.k,
        spectrum=spectrum,
    )
    mus = np.logspace(math.log10(args.mu_min), math.log10(args.mu_max), args.points)
    rows = []
    for mu in mus:
        p = params.with_mu(float(mu))
        rows.append((float(mu), g2(p, "threshold"), g2(p, "pnr")))

    curve_path = os.path.join(args.output_dir, "g2_curve.csv")

    def write_curve(path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("mu,g2_threshold,g2_pnr\n")
            for mu, gth, gpn in rows:
                fh.write(f"{mu!r},{gth!r},{gpn!r}\n")

    _atomic_write(curve_path, write_curve)

    gaps = [gth - gpn for _, gth, gpn in rows]
    i_max = int(np.argmax(gaps))
    summary = {
        "schmidt_number": spectrum.schmidt_number,
        "max_gap": gaps[i_max],
        "mu_at_max_gap": rows[i_max][0],
    }
    if args.target_g2 is not None:
        for config in ("threshold", "pnr"):
            summary[f"mu_at_target_{config}"] = mu_for_g2(
                args.target_g2, params, config
            )
    _write_json(os.path.join(args.output_dir, "curve_summary.json"), summary)
    _write_manifest(args.output_dir, "curve", args, ["g2_curve.csv", "curve_summary.json"])
    print(f"max_gap {summary['max_gap']:.6g} at mu {summary['mu_at_max_gap']:.6g}")
    return 0


# ----------------------------------------------------------------- simulate

def _cmd_simulate(args) -> int:
    os.makedirs(args.output_dir, exist_ok=True)
    spectrum = _spectrum_from_args(args)
    params = ModelParams(
        mu=args.mu,
        eta_i=args.eta_i,
        eta_s1=args.eta_s1,
        eta_s2=args.eta_s2,
        k=args.k,
        spectrum=spectrum,
    )
    timing = GeneratorTiming(
        single_center_ps=args.single_center,
        multi_center_ps=args.multi_center,
        jitter_ps=(args.jitter, args.jitter, args.jitter),
    )
    stream, truth = generate_run(
        params,
        args.pulses,
        timing=timing,
        seed=args.seed,
        clock_period_ps=args.clock_period,
    )
    outputs = []
    if args.binary:
        tags_path = os.path.join(args.output_dir, "tags.bin")
        _atomic_write(tags_path, lambda p: write_tags_binary(stream, p))
    else:
        tags_path = os.path.join(args.output_dir, "tags.csv")
        _atomic_write(tags_path, lambda p: write_tags_csv(stream, p))
    outputs.append(os.path.basename(tags_path))

    truth_path = os.path.join(args.output_dir, "truth.csv")

    def write_truth(path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("pulse,idler_clicks,s1_photons,s2_photons\n")
            for i in range(truth.clicks.size):
                fh.write(f"{i},{truth.clicks[i]},{truth.s1[i]},{truth.s2[i]}\n")

    _atomic_write(truth_path, write_truth)
    outputs.append("truth.csv")
    _write_manifest(args.output_dir, "simulate", args, outputs)
    print(f"tags {len(stream)} pulses {args.pulses}")
    return 0


# -------------------------------------------------------------------- count

def _cmd_count(args) -> int:
    os.makedirs(args.output_dir, exist_ok=True)
    if args.input.endswith(".bin"):
        stream = read_tags_binary(args.input)
    else:
        stream = read_tags_csv(args.input)
    cfg = RunConfig(
        clock_period_ps=args.clock_period,
        window_ps=args.window,
        channel_delays_ps=tuple(args.delays),
        pnr_bin_boundary_ps=args.boundary,
    )
    counts = count_coincidences(stream, cfg)
    path = os.path.join(args.output_dir, "counts.json")
    _atomic_write(path, lambda p: write_counts_json(counts, p))
    _write_manifest(args.output_dir, "count", args, ["counts.json"])
    print(
        f"pulses {counts.pulses} c_i {counts.c_i_total} "
        f"threefold_th {counts.threshold.c_is1s2} orphans {counts.orphans}"
    )
    return 0


# ---------------------------------------------------------------------- fit

def _cmd_fit(args) -> int:
    os.makedirs(args.output_dir, exist_ok=True)
    if not args.counts:
        raise ParameterError("no count files given")
    settings = [read_counts_json(path) for path in args.counts]
    spectrum = _spectrum_from_args(args)

    eff = estimate_efficiencies(settings)
    etas = (
        eff.eta_i if args.eta_i is None else args.eta_i,
        eff.eta_s1 if args.eta_s1 is None else args.eta_s1,
        eff.eta_s2 if args.eta_s2 is None else args.eta_s2,
    )
    mus = fit_mu(settings, etas, spectrum)
    depth = fit_tree_depth(settings, mus, etas[0], spectrum)

    payload = {
        "efficiencies": {
            "eta_i": {"value": eff.eta_i, "stderr": eff.eta_i_err},
            "eta_s1": {"value": eff.eta_s1, "stderr": eff.eta_s1_err},
            "eta_s2": {"value": eff.eta_s2, "stderr": eff.eta_s2_err},
            "out_of_regime": eff.out_of_regime,
        },
        "mu_per_setting": list(map(float, mus)),
        "tree_depth": asdict(depth),
        "g2": {},
    }
    for mode in ("threshold", "pnr_single"):
        try:
            res = g2_from_counts(settings[-1], mode)
            payload["g2"][mode] = {"value": res.value, "sigma": res.sigma}
        except HeraldError:
            payload["g2"][mode] = None
    _write_json(os.path.join(args.output_dir, "fit_results.json"), payload)
    _write_manifest(args.output_dir, "fit", args, ["fit_results.json"])
    print(
        f"eta_i {eff.eta_i:.4f} eta_s1 {eff.eta_s1:.4f} eta_s2 {eff.eta_s2:.4f} "
        f"k {depth.k:.3f}"
    )
    return 0


# ------------------------------------------------------------------- parser

def _add_common(sub):
    sub.add_argument("--output-dir", "-o", default=".", help="output directory")
    sub.add_argument("--config", help="key=value defaults file (flags win)")


def _add_spectrum_opts(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--spectrum", help="Schmidt spectrum CSV")
    group.add_argument(
        "--single-mode", action="store_true", help="use a single-mode source"
    )


def _add_eta_opts(sub, required=False):
    sub.add_argument("--eta-i", type=float, default=0.3280 if not required else None)
    sub.add_argument("--eta-s1", type=float, default=0.1802 if not required else None)
    sub.add_argument("--eta-s2", type=float, default=0.2210 if not required else None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heraldkit",
        description="Heralded single-photon source modeling and analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("jsi", help="synthesize or ingest a JSI and decompose it")
    _add_common(p)
    p.add_argument("--pump-center", type=float, default=jsi_mod.DEFAULT_PUMP_CENTER_NM)
    p.add_argument(
        "--pump-bandwidth", type=float, default=jsi_mod.DEFAULT_PUMP_BANDWIDTH_NM
    )
    p.add_argument(
        "--phasematch-bandwidth",
        type=float,
        default=jsi_mod.DEFAULT_PHASEMATCH_BANDWIDTH_NM,
    )
    p.add_argument(
        "--signal-band", type=float, nargs=2, default=list(jsi_mod.DEFAULT_SIGNAL_BAND_NM)
    )
    p.add_argument(
        "--idler-band", type=float, nargs=2, default=list(jsi_mod.DEFAULT_IDLER_BAND_NM)
    )
    p.add_argument("--grid", type=int, default=jsi_mod.DEFAULT_GRID_SIZE)
    p.add_argument("--cutoff", type=float, default=jsi_mod.DEFAULT_CUTOFF)
    p.add_argument("--separable", action="store_true", help="filter passbands only")
    p.add_argument("--ingest", help="read a JSI grid CSV instead of synthesizing")
    p.set_defaults(func=_cmd_jsi)

    p = subs.add_parser("curve", help="g2 vs mean pair number, both configurations")
    _add_common(p)
    _add_spectrum_opts(p)
    _add_eta_opts(p)
    p.add_argument("--k", type=float, default=2.55, help="tree depth")
    p.add_argument("--mu-min", type=float, default=1e-4)
    p.add_argument("--mu-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--target-g2", type=float, default=None)
    p.set_defaults(func=_cmd_curve)

    p = subs.add_parser("simulate", help="generate a tag stream")
    _add_common(p)
    _add_spectrum_opts(p)
    _add_eta_opts(p)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--k", type=int, default=3, help="integer tree depth")
    p.add_argument("--pulses", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clock-period", type=int, default=1_000_000)
    p.add_argument("--single-center", type=float, default=650.0)
    p.add_argument("--multi-center", type=float, default=250.0)
    p.add_argument("--jitter", type=float, default=25.0)
    p.add_argument("--binary", action="store_true", help="write binary tags")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("count", help="count coincidences in a tag stream")
    _add_common(p)
    p.add_argument("--input", required=True, help="tags CSV or binary file")
    p.add_argument("--clock-period", type=int, default=1_000_000)
    p.add_argument("--window", type=int, default=1_000)
    p.add_argument("--delays", type=int, nargs=4, default=[0, 0, 0, 0])
    p.add_argument("--boundary", type=int, default=450)
    p.set_defaults(func=_cmd_count)

    p = subs.add_parser("fit", help="recover parameters from counts")
    _add_common(p)
    _add_spectrum_opts(p)
    p.add_argument(
        "counts", nargs="*", help="counts JSON files, ascending pump power"
    )
    p.add_argument("--eta-i", type=float, default=None, help="override estimate")
    p.add_argument("--eta-s1", type=float, default=None)
    p.add_argument("--eta-s2", type=float, default=None)
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    preliminary, _ = parser.parse_known_args(argv)
    try:
        if getattr(preliminary, "config", None):
            # config file fills subcommand defaults; explicit flags win
            values = _load_config(preliminary.config)
            for sub_action in parser._subparsers._group_actions:
                sub = sub_action.choices.get(preliminary.command)
                if sub is not None:
                    known = {a.dest for a in sub._actions}
                    sub.set_defaults(
                        **{k: _coerce(sub, k, v) for k, v in values.items() if k in known}
                    )
        args = parser.parse_args(argv)
        return args.func(args)
    except HeraldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def _coerce(subparser, dest, raw):
    for action in subparser._actions:
        if action.dest == dest and action.type is not None:
            if action.nargs in (2, 4):
                return [action.type(v) for v in raw.split()]
            return action.type(raw)
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    return raw


if __name__ == "__main__":
    raise SystemExit(main())
