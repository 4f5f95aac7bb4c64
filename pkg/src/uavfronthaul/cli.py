"""Batch command-line front end.

Each subcommand resolves an ``ExperimentConfig`` (defaults <- preset <-
config file <- ``--set`` overrides), runs one experiment and writes CSV
artifacts plus a standalone gnuplot script that consumes them.  Every CSV
embeds the resolved config digest and seed, so re-running with identical
inputs reproduces byte-identical data rows.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 compare-verdict failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .analytic import BoundConfig, bound_for_link
from .antenna import GaussianApprox, QuadratureError, get_evaluator
from .config import ConfigError, ExperimentConfig, PRESETS
from .geometry import ConfigurationError, deploy_model, deploy_random
from .mcsim import (average_outage, build_deployment_context, run_phi_sweep,
                    run_theta_d_sweep)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERDICT = 4


class NumericFailure(RuntimeError):
    """A numerical routine failed; the message carries module context."""


# --- artifact helpers -----------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, cfg: ExperimentConfig, subcommand: str,
               header: list[str], rows) -> None:
    lines = [f"# uavfronthaul {subcommand} v1",
             f"# config_digest={cfg.digest()}",
             f"# seed={cfg['seed']}",
             ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_plot(path: Path, body: str) -> None:
    head = ("# gnuplot script (auto-generated); run: gnuplot " + path.name + "\n"
            "set datafile separator ','\n"
            "set datafile commentschars '#'\n"
            "set key outside\n"
            "set grid\n")
    path.write_text(head + body)


def _outdir(cfg: ExperimentConfig, override: str | None) -> Path:
    out = Path(override or cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- shared computations --------------------------------------------------

def _evaluators(cfg: ExperimentConfig):
    try:
        variants = [get_evaluator(c) for c in cfg.uav_array_configs()]
        sbs_eval = get_evaluator(cfg.sbs_array_config())
    except QuadratureError as exc:
        raise NumericFailure(f"antenna: {exc}") from exc
    return variants, sbs_eval


def _deployment_contexts(cfg: ExperimentConfig, variants, sbs_eval):
    spec = cfg.to_deployment_spec()
    params = cfg.to_channel_params()
    sim = cfg.to_sim_config()
    return [build_deployment_context(spec, d, variants[0], sbs_eval, params, sim)[0]
            for d in range(sim.n_deployments)]


def _bound_rows(cfg: ExperimentConfig, variants, sbs_eval):
    """Per-variant deployment-averaged outage upper bound."""
    bc = cfg.to_bound_config()
    vib = cfg.to_vibration()
    radius = cfg["deployment.coverage_radius_m"]
    ga = GaussianApprox()
    contexts = _deployment_contexts(cfg, variants, sbs_eval)
    rows = []
    for ev in variants:
        vals = [bound_for_link(ctx, ev.peak, ev.cfg.n, vib, bc, radius, ga)
                for ctx in contexts]
        rows.append((ev.cfg.n, float(np.mean(vals)), len(contexts)))
    return rows


def _sim_results(cfg: ExperimentConfig):
    results, _ = average_outage(
        cfg.to_deployment_spec(), cfg.uav_array_configs(),
        cfg.sbs_array_config(), cfg.to_channel_params(),
        cfg.to_vibration(), cfg.to_sim_config())
    return results


# --- subcommands ----------------------------------------------------------

def _cmd_deploy(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.to_deployment_spec()
    seed = cfg["seed"]
    if cfg["sim.deployment_model"] == "coverage":
        topo = deploy_model(spec, seed)
    else:
        topo = deploy_random(spec, seed)
    rows = [("uav", i, x, y, z, -1) for i, (x, y, z) in enumerate(topo.uav_xyz)]
    rows += [("sbs", s, x, y, 0.0, int(topo.assoc[s]))
             for s, (x, y) in enumerate(topo.sbs_xy)]
    _write_csv(out / "deploy.csv", cfg, "deploy",
               ["kind", "id", "x_m", "y_m", "z_m", "assoc"], rows)
    _write_plot(out / "deploy.gp", (
        "set size ratio -1\n"
        "set xlabel 'x (m)'\nset ylabel 'y (m)'\n"
        "plot 'deploy.csv' using 3:(strcol(1) eq 'sbs' ? $4 : 1/0) "
        "with points pt 7 ps 0.5 title 'SBS', \\\n"
        "     'deploy.csv' using 3:(strcol(1) eq 'uav' ? $4 : 1/0) "
        "with points pt 5 ps 1.5 title 'UAV'\n"))
    return EXIT_OK


def _cmd_pattern_dump(cfg: ExperimentConfig, out: Path) -> int:
    variants, _ = _evaluators(cfg)
    n_pts = cfg["sweep.pattern_points"]
    thetas = np.linspace(0.0, 90.0, n_pts)
    ga = GaussianApprox()
    cols: list[np.ndarray] = [thetas]
    header = ["theta_deg"]
    rad = np.radians(thetas)
    for ev in variants:
        gain = np.maximum(np.asarray(ev.gain(rad, 0.0)), 1e-30)
        env = np.maximum(ev.peak * ga.envelope(ev.cfg.n, rad), 1e-30)
        cols += [10.0 * np.log10(gain), 10.0 * np.log10(env)]
        header += [f"gain_db_n{ev.cfg.n}", f"envelope_db_n{ev.cfg.n}"]
    _write_csv(out / "pattern.csv", cfg, "pattern-dump", header,
               zip(*[c.tolist() for c in cols]))
    series = ", \\\n     ".join(
        f"'pattern.csv' using 1:{2 + 2 * i} with lines title 'N={ev.cfg.n}', \\\n"
        f"     'pattern.csv' using 1:{3 + 2 * i} with lines dt 2 "
        f"title 'N={ev.cfg.n} envelope'"
        for i, ev in enumerate(variants))
    _write_plot(out / "pattern.gp", (
        "set xlabel 'theta (deg)'\nset ylabel 'gain (dBi)'\n"
        f"plot {series}\n"))
    return EXIT_OK


def _cmd_phi_sweep(cfg: ExperimentConfig, out: Path) -> int:
    variants, sbs_eval = _evaluators(cfg)
    sim = cfg.to_sim_config()
    ctx = build_deployment_context(cfg.to_deployment_spec(), 0, variants[0],
                                   sbs_eval, cfg.to_channel_params(), sim)[0]
    step = math.radians(cfg["sweep.phi_step_deg"])
    grid = np.arange(0.0, math.pi / 4 + 0.5 * step, step)
    phis, table = run_phi_sweep(ctx, variants, cfg.to_vibration(), sim,
                                phi_grid=grid)
    header = ["phi_deg"]
    cols = [np.degrees(phis)]
    for v, ev in enumerate(variants):
        header += [f"mean_inter_w_n{ev.cfg.n}", f"mean_intra_w_n{ev.cfg.n}"]
        cols += [table["mean_inter_w"][v],
                 np.full(phis.size, table["mean_intra_w"][v])]
    header.append("noise_w")
    cols.append(np.full(phis.size, ctx.noise_w))
    _write_csv(out / "phi_sweep.csv", cfg, "phi-sweep", header,
               zip(*[c.tolist() for c in cols]))
    series = ", \\\n     ".join(
        f"'phi_sweep.csv' using 1:{2 + 2 * i} with lines "
        f"title 'inter N={ev.cfg.n}'" for i, ev in enumerate(variants))
    _write_plot(out / "phi_sweep.gp", (
        "set xlabel 'SBS azimuth orientation (deg)'\n"
        "set ylabel 'mean power (W)'\nset logscale y\n"
        f"plot {series}, \\\n"
        f"     'phi_sweep.csv' using 1:{2 + 2 * len(variants)} "
        "with lines dt 3 title 'noise'\n"))
    return EXIT_OK


def _cmd_theta_d_sweep(cfg: ExperimentConfig, out: Path) -> int:
    variants, _ = _evaluators(cfg)
    grid = np.radians(np.linspace(0.0, cfg["sweep.theta_d_max_deg"],
                                  cfg["sweep.theta_d_points"]))
    table = run_theta_d_sweep(variants, cfg.to_vibration(), cfg.to_sim_config(),
                              grid, np.array([0.0]))
    header = ["theta_d_deg"] + [f"mean_gain_n{ev.cfg.n}" for ev in variants]
    cols = [np.degrees(grid)] + [table[v, 0] for v in range(len(variants))]
    _write_csv(out / "theta_d_sweep.csv", cfg, "theta-d-sweep", header,
               zip(*[c.tolist() for c in cols]))
    series = ", \\\n     ".join(
        f"'theta_d_sweep.csv' using 1:{2 + i} with lines title 'N={ev.cfg.n}'"
        for i, ev in enumerate(variants))
    _write_plot(out / "theta_d_sweep.gp", (
        "set xlabel 'separation angle (deg)'\n"
        "set ylabel 'mean interference gain'\nset logscale y\n"
        f"plot {series}\n"))
    return EXIT_OK


def _cmd_outage_sim(cfg: ExperimentConfig, out: Path) -> int:
    results = _sim_results(cfg)
    rows = [(r.n_elements, r.p_out, r.stderr, r.n_effective, r.mean_signal_w,
             r.mean_intra_w, r.mean_inter_w, r.noise_w) for r in results]
    _write_csv(out / "outage_sim.csv", cfg, "outage-sim",
               ["n_elements", "p_out", "stderr", "n_effective", "mean_signal_w",
                "mean_intra_w", "mean_inter_w", "noise_w"], rows)
    _write_plot(out / "outage_sim.gp", (
        "set xlabel 'array size N'\nset ylabel 'outage probability'\n"
        "set logscale y\n"
        "plot 'outage_sim.csv' using 1:2:3 with yerrorlines "
        "title 'simulated'\n"))
    return EXIT_OK


def _cmd_outage_bound(cfg: ExperimentConfig, out: Path) -> int:
    variants, sbs_eval = _evaluators(cfg)
    rows = _bound_rows(cfg, variants, sbs_eval)
    _write_csv(out / "outage_bound.csv", cfg, "outage-bound",
               ["n_elements", "p_out_bound", "n_deployments"], rows)
    _write_plot(out / "outage_bound.gp", (
        "set xlabel 'array size N'\nset ylabel 'outage probability'\n"
        "set logscale y\n"
        "plot 'outage_bound.csv' using 1:2 with linespoints "
        "title 'analytic bound'\n"))
    return EXIT_OK


def _cmd_compare(cfg: ExperimentConfig, out: Path) -> int:
    variants, sbs_eval = _evaluators(cfg)
    results = _sim_results(cfg)
    bounds = {n: b for n, b, _ in _bound_rows(cfg, variants, sbs_eval)}
    rows, all_ok = [], True
    for r in results:
        b = bounds[r.n_elements]
        margin = b - (r.p_out - 2.0 * r.stderr)
        ok = margin >= 0.0
        all_ok &= ok
        rows.append((r.n_elements, r.p_out, r.stderr, b, margin,
                     "PASS" if ok else "FAIL"))
    _write_csv(out / "compare.csv", cfg, "compare",
               ["n_elements", "sim_p_out", "sim_stderr", "bound_p_out",
                "dominance_margin", "verdict"], rows)
    _write_plot(out / "compare.gp", (
        "set xlabel 'array size N'\nset ylabel 'outage probability'\n"
        "set logscale y\n"
        "plot 'compare.csv' using 1:2:3 with yerrorlines title 'simulated', \\\n"
        "     'compare.csv' using 1:4 with linespoints title 'analytic bound'\n"))
    verdict = "PASS" if all_ok else "FAIL"
    print(f"compare verdict: {verdict} "
          f"(bound >= simulation - 2*stderr at every sweep point: {all_ok})")
    return EXIT_OK if all_ok else EXIT_VERDICT


_COMMANDS = {
    "deploy": _cmd_deploy,
    "pattern-dump": _cmd_pattern_dump,
    "phi-sweep": _cmd_phi_sweep,
    "theta-d-sweep": _cmd_theta_d_sweep,
    "outage-sim": _cmd_outage_sim,
    "outage-bound": _cmd_outage_bound,
    "compare": _cmd_compare,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavfronthaul",
        description="UAV mmWave fronthaul outage experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="YAML experiment config file")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                       help="named experiment preset")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="PATH=VALUE",
                       help="dot-path config override (repeatable)")
        p.add_argument("--output-dir", default=None,
                       help="artifact directory (overrides config)")
        p.add_argument("--dry-run", action="store_true",
                       help="validate and print the resolved config only")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = {}
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError([f"override {item!r} is not PATH=VALUE"])
            path, _, value = item.partition("=")
            overrides[path.strip()] = value
        file_text = None
        if args.config is not None:
            if not args.config.is_file():
                raise ConfigError([f"config file not found: {args.config}"])
            file_text = args.config.read_text()
        cfg = ExperimentConfig.resolve(file_text, args.preset, overrides)
    except (ConfigError, ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.dry_run:
        print(f"# resolved config (digest {cfg.digest()})")
        print(cfg.dump(), end="")
        return EXIT_OK

    try:
        out = _outdir(cfg, args.output_dir)
        return _COMMANDS[args.subcommand](cfg, out)
    except NumericFailure as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"numeric error in {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
