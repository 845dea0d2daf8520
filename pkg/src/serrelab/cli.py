"""Command-line front end: single runs, nested-grid convergence sweeps,
reference comparisons and the closed-form reference table.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import diagnostics, io, reference, solvers
from .core import (ConfigError, SimConfig, format_config, parse_config_file,
                   parse_config_text)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2

MANIFEST_KEYS = ("h0", "h1", "x0", "alpha", "domain_a", "domain_b",
                 "dt_factor", "t_end", "g", "scheme", "out_dir",
                 "snapshot_times", "alphas", "levels", "exclude_window")
MANIFEST_REQUIRED = ("h0", "h1", "x0", "domain_a", "domain_b", "t_end",
                     "scheme", "alphas", "levels")


@dataclass
class ExperimentManifest:
    """Sweep of smoothing lengths and refinement levels (dx = 10 / 2^k)."""

    base: dict
    alphas: tuple
    levels: tuple
    out_dir: str
    snapshot_times: tuple = ()
    exclude_window: tuple | None = None

    def config(self, alpha: float, level: int) -> SimConfig:
        kw = dict(self.base)
        kw["alpha"] = alpha
        kw["dx"] = level_dx(level)
        kw["snapshot_times"] = self.snapshot_times
        return SimConfig(**kw)

    def cell_dir(self, alpha: float, level: int) -> str:
        return os.path.join(self.out_dir, io.fmt(alpha), str(level))


def level_dx(level: int) -> float:
    return 10.0 / 2 ** level


def parse_manifest_file(path, out_override=None) -> ExperimentManifest:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in MANIFEST_KEYS:
                raise ConfigError(f"unknown key: {key}")
            if key in values:
                raise ConfigError(f"duplicate key: {key}")
            values[key] = raw.strip()
    for key in MANIFEST_REQUIRED:
        if key not in values:
            raise ConfigError(f"missing key: {key}")

    alphas = tuple(float(a) for a in values.pop("alphas").split(","))
    levels = tuple(int(k) for k in values.pop("levels").split(","))
    if len(levels) < 2:
        raise ConfigError("need at least 2 refinement levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("refinement levels must be strictly increasing")
    snapshot_times = ()
    if values.get("snapshot_times"):
        snapshot_times = tuple(float(t)
                               for t in values.pop("snapshot_times").split(","))
    else:
        values.pop("snapshot_times", None)
    exclude = None
    if values.get("exclude_window"):
        exclude = parse_window(values.pop("exclude_window"))
    else:
        values.pop("exclude_window", None)
    out_dir = out_override or values.pop("out_dir", None)
    values.pop("out_dir", None)
    if not out_dir:
        raise ConfigError("missing key: out_dir")
    values.pop("alpha", None)
    base = {k: (v if k == "scheme" else float(v)) for k, v in values.items()}
    return ExperimentManifest(base=base, alphas=alphas, levels=levels,
                              out_dir=out_dir, snapshot_times=snapshot_times,
                              exclude_window=exclude)


def parse_window(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"bad window (expected lo,hi): {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if hi < lo:
        raise ConfigError("window hi must be >= lo")
    return lo, hi


def _analytic_totals_or_none(config: SimConfig):
    try:
        from .core import analytic_totals
        return analytic_totals(config)
    except ConfigError:
        return None


def execute_run(config: SimConfig, out_dir: str):
    """Run one simulation and write its full file set into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.txt"), "w") as fh:
        fh.write(format_config(config))

    state, snapshots, reports = solvers.simulate(config)
    totals_0 = _analytic_totals_or_none(config)
    sol = None
    delta = None
    if config.h1 > config.h0:
        sol = reference.solve_swwe_dambreak(config.h0, config.h1, config.g,
                                            x0=config.x0)
        delta = 0.01 * (config.h1 - config.h0)
    records = []
    for snap in snapshots:
        io.write_snapshot(os.path.join(out_dir, io.snapshot_filename(snap.t)),
                          snap)
        records.append(diagnostics.diagnose(snap, config.g, totals_0=totals_0,
                                            sol=sol, h0=config.h0, delta=delta))
    io.write_step_reports(os.path.join(out_dir, "step_report.csv"), reports)
    io.write_diagnostics(os.path.join(out_dir, "diagnostics.csv"), records)
    return snapshots, records


def cmd_run(args) -> int:
    config = parse_config_file(args.config)
    overrides = {}
    if args.scheme:
        overrides["scheme"] = args.scheme
    if args.out:
        overrides["out_dir"] = args.out
    if overrides:
        config = config.with_overrides(**overrides)
    if not config.out_dir:
        raise ConfigError("missing key: out_dir (set it or pass --out)")
    execute_run(config, config.out_dir)
    print(f"run complete: {config.out_dir}")
    return EXIT_OK


def _sweep_cell(manifest: ExperimentManifest, alpha: float, level: int):
    config = manifest.config(alpha, level)
    out_dir = manifest.cell_dir(alpha, level)
    snapshots, records = execute_run(config, out_dir)
    return alpha, level, snapshots[-1], records[-1]


def cmd_converge(args) -> int:
    manifest = parse_manifest_file(args.manifest, out_override=args.out)
    if args.scheme:
        manifest.base["scheme"] = args.scheme
    exclude = manifest.exclude_window
    if args.exclude_window:
        exclude = parse_window(args.exclude_window)
    os.makedirs(manifest.out_dir, exist_ok=True)
    with open(args.manifest) as src, \
            open(os.path.join(manifest.out_dir, "manifest.txt"), "w") as dst:
        dst.write(src.read())

    cells = [(alpha, level) for alpha in manifest.alphas
             for level in manifest.levels]
    results = {}
    failed = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {(a, k): pool.submit(_sweep_cell, manifest, a, k)
                       for a, k in cells}
            for (a, k), fut in futures.items():
                try:
                    results[a, k] = fut.result()
                except solvers.SolverError as exc:
                    failed.append((a, k, str(exc)))
    else:
        for a, k in cells:
            try:
                results[a, k] = _sweep_cell(manifest, a, k)
            except solvers.SolverError as exc:
                failed.append((a, k, str(exc)))

    window_label = f"{exclude[0]},{exclude[1]}" if exclude else ""
    table_rows = []
    rate_rows = []
    for alpha in manifest.alphas:
        levels_ok = [k for k in manifest.levels if (alpha, k) in results]
        if len(levels_ok) < 2:
            continue
        finest = results[alpha, levels_ok[-1]][2]
        l1_by_level = {}
        for k in levels_ok:
            snap = results[alpha, k][2]
            record = results[alpha, k][3]
            row = {"alpha": alpha, "dx": level_dx(k),
                   "C1_h": record.C1_h, "C1_uh": record.C1_uh,
                   "C1_H": record.C1_H, "excluded_window": window_label}
            if k != levels_ok[-1]:
                row["L1_h"] = diagnostics.l1_difference(snap, finest, "h",
                                                        exclude_window=exclude)
                row["L1_u"] = diagnostics.l1_difference(snap, finest, "u",
                                                        exclude_window=exclude)
                l1_by_level[k] = (row["L1_h"], row["L1_u"])
            table_rows.append(row)
        pairs = [k for k in levels_ok[:-1]]
        for ka, kb in zip(pairs, pairs[1:]):
            la, lb = l1_by_level[ka], l1_by_level[kb]
            rate_rows.append([alpha, level_dx(ka), level_dx(kb),
                              math.log2(la[0] / lb[0]) if lb[0] > 0 else float("nan"),
                              math.log2(la[1] / lb[1]) if lb[1] > 0 else float("nan")])

    io.write_convergence_table(os.path.join(manifest.out_dir,
                                            "convergence.csv"), table_rows)
    io.write_rows(os.path.join(manifest.out_dir, "rates.csv"),
                  ["alpha", "dx_coarse", "dx_fine", "rate_h", "rate_u"],
                  rate_rows)
    for alpha, k, msg in failed:
        print(f"error: cell alpha={alpha} level={k} failed: {msg}",
              file=sys.stderr)
    if failed:
        print("convergence table written with partial results", file=sys.stderr)
        return EXIT_SOLVER
    print(f"converge complete: {manifest.out_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    run_dir = args.run_dir
    config = parse_config_file(os.path.join(run_dir, "config.txt"))
    snaps = io.list_snapshots(run_dir)
    if not snaps:
        raise ConfigError(f"no snapshots in {run_dir}")
    t, path = snaps[-1]
    snap = io.read_snapshot(path, t=t)
    out_path = os.path.join(run_dir, "compare.csv")

    if not config.h1 > config.h0 or t <= 0:
        io.write_rows(out_path, ["result"], [["no bore"]])
        print(f"compare complete: {out_path}")
        return EXIT_OK

    sol = reference.solve_swwe_dambreak(config.h0, config.h1, config.g,
                                        x0=config.x0)
    whitham = reference.whitham_leading_wave(config.h0, config.h1, config.g,
                                             x0=config.x0)
    delta = 0.01 * (config.h1 - config.h0)
    crest = diagnostics.leading_wave(snap, config.h0, delta)
    h_mean, u_mean, _ = diagnostics.bore_means(snap, sol, t)
    header = ["t", "h_mean", "h2", "u_mean", "u2", "A", "A_plus",
              "x_A", "x_S2", "x_S_plus"]
    if crest is None:
        io.write_rows(out_path, ["result"], [["no bore"]])
    else:
        x_a, amp = crest
        io.write_rows(out_path, header,
                      [[t, h_mean, sol.h2, u_mean, sol.u2, amp,
                        whitham.A_plus, x_a, sol.x_shock(t),
                        whitham.x_front(t)]])
    print(f"compare complete: {out_path}")
    return EXIT_OK


def cmd_reference(args) -> int:
    sol = reference.solve_swwe_dambreak(args.h0, args.h1, args.g, x0=args.x0)
    whitham = reference.whitham_leading_wave(args.h0, args.h1, args.g,
                                             x0=args.x0)
    t = args.t
    header = ["h2", "u2", "S2", "h_b", "delta", "A_plus", "S_plus",
              "x_u2", "x_S2", "x_S_plus"]
    row = [sol.h2, sol.u2, sol.S2, whitham.h_b, whitham.delta,
           whitham.A_plus, whitham.S_plus, sol.x_u2(t), sol.x_shock(t),
           whitham.x_front(t)]
    print(",".join(header))
    print(",".join(io.fmt(v) for v in row))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="serrelab",
        description="Dispersive shallow-water dam-break laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--scheme", choices=("D", "E"), default=None)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge",
                            help="nested-grid sweep with L1/C1 table")
    p_conv.add_argument("--manifest", required=True)
    p_conv.add_argument("--out", default=None)
    p_conv.add_argument("--workers", type=int, default=1)
    p_conv.add_argument("--scheme", choices=("D", "E"), default=None)
    p_conv.add_argument("--exclude-window", default=None,
                        metavar="LO,HI")
    p_conv.set_defaults(func=cmd_converge)

    p_cmp = sub.add_parser("compare",
                           help="compare a finished run with the closed forms")
    p_cmp.add_argument("run_dir")
    p_cmp.set_defaults(func=cmd_compare)

    p_ref = sub.add_parser("reference", help="print the closed-form table")
    p_ref.add_argument("--h0", type=float, required=True)
    p_ref.add_argument("--h1", type=float, required=True)
    p_ref.add_argument("--t", type=float, default=30.0)
    p_ref.add_argument("--g", type=float, default=9.81)
    p_ref.add_argument("--x0", type=float, default=reference.DEFAULT_X0)
    p_ref.set_defaults(func=cmd_reference)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solvers.SolverError as exc:
        print(f"error: solver failed at step {exc.step}: {exc}",
              file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
