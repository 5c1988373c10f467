"""Command-line pipeline runner: train, decompose, analyze, report.

Every subcommand reads one JSON config, applies flag overrides, writes
the resolved config into each directory it touches, and emits CSV files
(plus SVG figures unless --no-figures). Exit codes: 0 success, 1
compute failure, 2 configuration or I/O problem.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import fileio, plots
from .analysis import (SearchGrid, curvature_over_time,
                       directional_loss_profile, improvement_report,
                       optimal_step_search, quadratic_fit,
                       step_vs_curvature_correlation)
from .config import ConfigError, RunConfig, load_config
from .data import Dataset, IdxFormatError, fixed_subset, load_idx, make_blobs
from .eigen import EigenPair, NonConvergedError, hessian_spectrum
from .model import init_params, make_loss_operator
from .ndcore.operator import NonFiniteError
from .negcurve import run_alternating, run_baseline
from .testfns import diag_quadratic
from .train import load_eigvec, load_trajectory, save_eigvec, save_trajectory, train

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2

SPECTRUM_HEADER = ("t", "side", "rank", "lambda", "residual", "vecfile")


class MissingArtifactError(RuntimeError):
    """A command needs outputs of an earlier stage that are not on disk."""


# ---------------------------------------------------------------- paths


class Workspace:
    """Directory layout under the configured output root."""

    def __init__(self, root: str):
        self.root = root
        self.trajectory = os.path.join(root, "trajectory")
        self.spectra = os.path.join(root, "spectra")
        self.vecs = os.path.join(self.spectra, "vecs")
        self.analysis = os.path.join(root, "analysis")
        self.negcurve = os.path.join(root, "negcurve")
        self.figures = os.path.join(root, "figures")


def _cell(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fileio.fmt_float(float(x))
    return str(x)


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(_cell(c) for c in row) for row in rows)
    fileio.atomic_write_text(path, "\n".join(lines) + "\n")


def _write_resolved(config: RunConfig, dirs, stamp: bool):
    doc = config.to_dict()
    if stamp:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    text = fileio.canonical_json(doc) + "\n"
    for d in dirs:
        os.makedirs(d, exist_ok=True)
        fileio.atomic_write_text(os.path.join(d, "resolved_config.json"), text)


def _parallel(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- inputs


def build_dataset(config: RunConfig) -> Dataset:
    d = config.data
    if d.kind == "idx":
        return load_idx(d.images, d.labels)
    return make_blobs(d.classes, d.per_class, d.dim, d.spread,
                      seed=config.data_seed)


def subset_operator(config: RunConfig, ds: Dataset, spec):
    """Loss operator over the fixed analysis subset (deterministic Hessian)."""
    sub = fixed_subset(ds, config.data.subset_fraction,
                       seed=config.subset_seed)
    inputs, labels = sub.rows()
    return make_loss_operator(spec, inputs, labels, l2=config.train.l2,
                              tag=sub.tag)


def _load_traj(ws: Workspace):
    manifest = os.path.join(ws.trajectory, "trajectory.json")
    if not os.path.exists(manifest):
        raise MissingArtifactError(
            f"no trajectory at {ws.trajectory}; run the train command first")
    return load_trajectory(ws.trajectory)


def _spectrum_rows(ws: Workspace) -> list[dict]:
    path = os.path.join(ws.spectra, "spectrum.csv")
    if not os.path.exists(path):
        raise MissingArtifactError(
            f"no spectrum file at {path}; run the eigen command first")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SPECTRUM_HEADER:
            raise MissingArtifactError(
                f"{path}: header {reader.fieldnames} does not match "
                f"{list(SPECTRUM_HEADER)}")
        rows = [{"t": int(r["t"]), "side": r["side"], "rank": int(r["rank"]),
                 "lambda": float(r["lambda"]),
                 "residual": float(r["residual"]), "vecfile": r["vecfile"]}
                for r in reader]
    if not rows:
        raise MissingArtifactError(f"{path}: spectrum file has no rows")
    return rows


def _resolve_step(rows, requested: int | None, earliest: bool) -> int:
    steps = sorted({r["t"] for r in rows})
    if requested is None:
        return steps[0] if earliest else steps[-1]
    if requested not in steps:
        raise MissingArtifactError(
            f"no spectrum at step {requested}; available steps: {steps}")
    return requested


def _load_pair(ws: Workspace, row) -> EigenPair:
    path = os.path.join(ws.spectra, row["vecfile"])
    if not os.path.exists(path):
        raise MissingArtifactError(f"missing eigenvector file {path}")
    _, lam, residual, vec = load_eigvec(path)
    return EigenPair(lam, vec, residual)


def _pairs_at(ws: Workspace, rows, step: int) -> list[EigenPair]:
    """All stored directions at a step: LA ranks first, then SA ranks."""
    chosen = [r for r in rows if r["t"] == step]
    chosen.sort(key=lambda r: (0 if r["side"] == "LA" else 1, r["rank"]))
    return [_load_pair(ws, r) for r in chosen]


# ---------------------------------------------------------------- commands


def cmd_train(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    ds = build_dataset(config)
    spec = config.model_spec()
    traj = train(spec, ds, config.train.optimizer,
                 config.train.checkpoint_every, config.train.total_steps,
                 seed=config.shuffle_seed, l2=config.train.l2)
    save_trajectory(ws.trajectory, traj)
    _write_resolved(config, [ws.root, ws.trajectory], not args.no_timestamp)
    first, last = traj.checkpoints[0], traj.checkpoints[-1]
    print(f"trained {spec.param_count} parameters for {last.step} steps "
          f"({len(traj.checkpoints)} checkpoints)")
    print(f"loss {first.loss:.6g} -> {last.loss:.6g}; "
          f"trajectory in {ws.trajectory}")
    return EXIT_OK


def cmd_eigen(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    traj = _load_traj(ws)
    ds = build_dataset(config)
    op = subset_operator(config, ds, traj.spec)
    steps = config.eigen.steps or (traj.steps()[-1],)
    os.makedirs(ws.vecs, exist_ok=True)
    rows = []
    for t in steps:
        ckpt = traj.at(t)
        for side in config.eigen.sides:
            report = hessian_spectrum(op, ckpt.theta, config.eigen.k, side,
                                      tol=config.eigen.tol,
                                      max_iter=config.eigen.max_iter,
                                      seed=config.eigen_seed, step=t)
            for rank, pair in enumerate(report.pairs):
                vecfile = f"vecs/t{t:08d}_{side}_r{rank:02d}.hsev"
                save_eigvec(os.path.join(ws.spectra, vecfile), t, pair.lam,
                            pair.residual, pair.vec)
                rows.append((t, side, rank, pair.lam, pair.residual, vecfile))
            lams = ", ".join(f"{p.lam:.6g}" for p in report.pairs)
            print(f"t={t} {side}({config.eigen.k}): {lams} "
                  f"[{report.operator_applications} HVPs]")
    _write_csv(os.path.join(ws.spectra, "spectrum.csv"), SPECTRUM_HEADER, rows)
    _write_resolved(config, [ws.root, ws.spectra], not args.no_timestamp)
    return EXIT_OK


def cmd_track(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    rows = _spectrum_rows(ws)
    t0 = _resolve_step(rows, config.analysis.t0, earliest=True)
    rank = config.analysis.rank
    sides = [r["side"] for r in rows if r["t"] == t0]
    side = "LA" if "LA" in sides else sides[0]
    match = [r for r in rows
             if r["t"] == t0 and r["side"] == side and r["rank"] == rank]
    if not match:
        have = sorted(r["rank"] for r in rows
                      if r["t"] == t0 and r["side"] == side)
        raise MissingArtifactError(
            f"no {side} rank {rank} direction at t0={t0}; stored ranks: {have}")
    probe = _load_pair(ws, match[0])
    traj = _load_traj(ws)
    op = subset_operator(config, build_dataset(config), traj.spec)
    series = curvature_over_time(traj, t0, probe, op)
    out = [(series.t0, t, c) for t, c in zip(series.steps, series.curvatures)]
    _write_csv(os.path.join(ws.analysis, "curvature_series.csv"),
               ("t0", "t", "curvature"), out)
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        plots.plot_curvature_series(
            series, os.path.join(ws.figures, "curvature_series.svg"))
    lo, hi = min(series.curvatures), max(series.curvatures)
    print(f"tracked {side} rank {rank} direction from t0={t0} over "
          f"{len(out)} checkpoints; curvature range [{lo:.6g}, {hi:.6g}]")
    return EXIT_OK


def _probe_quadratic_test(config: RunConfig, args) -> int:
    """Self-check on an explicit quadratic: model must match true loss."""
    ws = Workspace(config.output)
    op = diag_quadratic([3.0, 1.0, -2.0])
    theta = np.ones(3)
    rows, worst = [], 0.0
    for i, lam in enumerate([3.0, 1.0, -2.0]):
        vec = np.zeros(3)
        vec[i] = 1.0
        profile = directional_loss_profile(op, theta, EigenPair(lam, vec, 0.0),
                                           config.analysis.alpha_max,
                                           config.analysis.n_points)
        gap = float(np.nanmax(np.abs(profile.true_losses
                                     - profile.model_losses)))
        worst = max(worst, gap)
        for alpha, tl, ml in zip(profile.alphas, profile.true_losses,
                                 profile.model_losses):
            rows.append((i, lam, alpha, tl, ml))
    _write_csv(os.path.join(ws.analysis, "profiles.csv"),
               ("i", "lambda", "alpha", "true_loss", "quad_model"), rows)
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    print(f"quadratic self-check: max |true - model| = {worst:.3e}")
    if worst >= 1e-12:
        print("self-check FAILED (expected exact match)", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def cmd_probe(config: RunConfig, args) -> int:
    if getattr(args, "quadratic_test", False):
        return _probe_quadratic_test(config, args)
    ws = Workspace(config.output)
    rows = _spectrum_rows(ws)
    step = _resolve_step(rows, config.analysis.step, earliest=False)
    pairs = _pairs_at(ws, rows, step)
    traj = _load_traj(ws)
    theta = traj.at(step).theta
    op = subset_operator(config, build_dataset(config), traj.spec)

    def run(pair):
        return directional_loss_profile(op, theta, pair,
                                        config.analysis.alpha_max,
                                        config.analysis.n_points)

    profiles = _parallel(run, pairs, args.jobs)
    out = []
    for i, profile in enumerate(profiles):
        for alpha, tl, ml in zip(profile.alphas, profile.true_losses,
                                 profile.model_losses):
            out.append((i, profile.pair.lam, alpha, tl, ml))
    _write_csv(os.path.join(ws.analysis, "profiles.csv"),
               ("i", "lambda", "alpha", "true_loss", "quad_model"), out)
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        for i, profile in enumerate(profiles):
            plots.plot_profile(profile,
                               os.path.join(ws.figures, f"profile_{i:02d}.svg"),
                               index=i)
    print(f"profiled {len(profiles)} directions at t={step} over "
          f"alpha in [-{config.analysis.alpha_max:g}, "
          f"{config.analysis.alpha_max:g}] ({config.analysis.n_points} points)")
    return EXIT_OK


def cmd_fit(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    rows = _spectrum_rows(ws)
    step = _resolve_step(rows, config.analysis.step, earliest=False)
    pairs = _pairs_at(ws, rows, step)
    traj = _load_traj(ws)
    theta = traj.at(step).theta
    op = subset_operator(config, build_dataset(config), traj.spec)

    def run(job):
        i, pair, rng = job
        profile = directional_loss_profile(op, theta, pair, rng,
                                           config.analysis.n_points)
        return quadratic_fit(profile, index=i)

    jobs = [(i, pair, rng) for rng in config.analysis.ranges
            for i, pair in enumerate(pairs)]
    fits = _parallel(run, jobs, args.jobs)
    out = [(f.index, f.lam, f.alpha_max, f.curvature, f.residual)
           for f in fits]
    _write_csv(os.path.join(ws.analysis, "fits.csv"),
               ("i", "lambda", "range", "y", "residual"), out)
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        for j, rng in enumerate(config.analysis.ranges):
            group = [f for f in fits if f.alpha_max == rng]
            plots.plot_fit_scatter(
                group, os.path.join(ws.figures, f"fit_scatter_{j}.svg"))
    n_ok = sum(1 for f in fits if not f.degenerate)
    print(f"fitted {n_ok}/{len(fits)} direction/range combinations at t={step}")
    return EXIT_OK


def _search_grid(config: RunConfig) -> SearchGrid:
    a = config.analysis
    return SearchGrid(a.search_alpha_min, a.search_alpha_max,
                      a.search_points_per_side, a.golden_iters)


def cmd_linesearch(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    rows = _spectrum_rows(ws)
    step = _resolve_step(rows, config.analysis.step, earliest=False)
    pairs = _pairs_at(ws, rows, step)
    traj = _load_traj(ws)
    theta = traj.at(step).theta
    op = subset_operator(config, build_dataset(config), traj.spec)
    grid = _search_grid(config)

    def run(job):
        i, pair = job
        return optimal_step_search(op, theta, pair, grid, index=i)

    results = _parallel(run, list(enumerate(pairs)), args.jobs)
    out = [(r.index, r.lam, r.alpha_star,
            1.0 / r.alpha_star if r.alpha_star != 0.0 else math.nan,
            r.improvement, r.boundary) for r in results]
    _write_csv(os.path.join(ws.analysis, "linesearch.csv"),
               ("i", "lambda", "alpha_star", "inv_alpha_star", "delta_L",
                "boundary"), out)
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        plots.plot_step_scatter(results,
                                os.path.join(ws.figures, "step_scatter.svg"))
    n_bound = sum(1 for r in results if r.boundary)
    print(f"line-searched {len(results)} directions at t={step}; "
          f"{n_bound} hit the grid boundary")
    return EXIT_OK


def cmd_improve(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    rows = _spectrum_rows(ws)
    step = _resolve_step(rows, config.analysis.step, earliest=False)
    pairs = _pairs_at(ws, rows, step)
    if not pairs:
        raise MissingArtifactError(f"spectrum has no directions at t={step}")
    traj = _load_traj(ws)
    theta = traj.at(step).theta
    op = subset_operator(config, build_dataset(config), traj.spec)
    grid = _search_grid(config)

    if args.jobs > 1:
        def run(job):
            i, pair = job
            return optimal_step_search(op, theta, pair, grid, index=i)
        results = _parallel(run, list(enumerate(pairs)), args.jobs)
    else:
        results = improvement_report(op, theta, pairs, grid)

    out = [(r.index, r.lam, r.alpha_star,
            1.0 / r.alpha_star if r.alpha_star != 0.0 else math.nan,
            r.improvement, abs(r.alpha_star * r.lam), r.boundary)
           for r in results]
    _write_csv(os.path.join(ws.analysis, "improvement.csv"),
               ("i", "lambda", "alpha_star", "inv_alpha_star", "delta_L",
                "abs_alpha_lambda", "boundary"), out)
    pos_corr, pos_n = step_vs_curvature_correlation(results, +1)
    neg_corr, neg_n = step_vs_curvature_correlation(results, -1)

    def _json_safe(x):
        return None if math.isnan(x) else x

    summary = {"step": step,
               "positive": {"correlation": _json_safe(pos_corr), "count": pos_n},
               "negative": {"correlation": _json_safe(neg_corr), "count": neg_n},
               "total_improvement": float(sum(r.improvement for r in results))}
    fileio.atomic_write_text(
        os.path.join(ws.analysis, "improvement_summary.json"),
        fileio.canonical_json(summary) + "\n")
    _write_resolved(config, [ws.root, ws.analysis], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        plots.plot_step_scatter(
            results, os.path.join(ws.figures, "improve_step_scatter.svg"))
        plots.plot_improvement_scatter(
            results, os.path.join(ws.figures, "improve_gain_scatter.svg"))
    print(f"improvement report at t={step}: corr(1/alpha*, lambda) = "
          f"{pos_corr:.4f} over {pos_n} positive directions, "
          f"{neg_corr:.4f} over {neg_n} negative directions")
    return EXIT_OK


def cmd_negcurve(config: RunConfig, args) -> int:
    ws = Workspace(config.output)
    ds = build_dataset(config)
    spec = config.model_spec()
    theta0 = init_params(spec)
    op = make_loss_operator(spec, ds.inputs, ds.labels, l2=config.train.l2,
                            tag="negcurve-full")
    opt = config.train.optimizer
    spe = math.ceil(ds.n / opt.batch_size)
    steps = config.negcurve.steps
    nc = config.negcurve.tracker_config(config.tracker_seed)
    base_state, base_losses = run_baseline(op, theta0, opt, steps, spe)
    alt_state, tracker, log_rows = run_alternating(op, theta0, opt, nc, steps,
                                                   spe)
    _write_csv(os.path.join(ws.negcurve, "negcurve_log.csv"),
               ("t", "loss", "lambda", "g_dot_v", "fired"),
               [(r.step, r.loss, r.lam, r.projection, r.fired)
                for r in log_rows])
    _write_csv(os.path.join(ws.negcurve, "comparison.csv"),
               ("t", "baseline_loss", "alternating_loss"),
               [(i + 1, bl, r.loss)
                for i, (bl, r) in enumerate(zip(base_losses, log_rows))])
    _write_resolved(config, [ws.root, ws.negcurve], not args.no_timestamp)
    if args.figures:
        os.makedirs(ws.figures, exist_ok=True)
        plots.plot_negcurve_comparison(
            base_losses, log_rows,
            os.path.join(ws.figures, "negcurve_comparison.svg"))
    fired = sum(1 for r in log_rows if r.fired)
    print(f"paired runs of {steps} steps: final loss "
          f"{op.loss(base_state.theta):.6g} baseline vs "
          f"{op.loss(alt_state.theta):.6g} alternating "
          f"(extra step fired {fired}x, final tracked curvature "
          f"{tracker.lam:.6g})")
    return EXIT_OK


def cmd_all(config: RunConfig, args) -> int:
    for fn in (cmd_train, cmd_eigen, cmd_track, cmd_probe, cmd_fit,
               cmd_linesearch, cmd_improve, cmd_negcurve):
        rc = fn(config, args)
        if rc != EXIT_OK:
            return rc
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s]


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s]


def _side_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hessianscope",
        description="Curvature analysis of neural-network loss surfaces "
                    "through exact Hessian-vector products.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name: str, help_text: str):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", help="path to a JSON run configuration")
        sp.add_argument("--output", help="override the output directory")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for per-direction analyses")
        sp.add_argument("--figures", action=argparse.BooleanOptionalAction,
                        default=True, help="render SVG figures")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp from resolved configs")
        return sp

    common("train", "train a model and record the checkpoint trajectory")

    sp = common("eigen", "extreme Hessian eigenpairs at chosen checkpoints")
    sp.add_argument("--k", type=int, help="eigenpairs per side")
    sp.add_argument("--steps", type=_int_list, dest="eigen_steps",
                    help="comma-separated checkpoint steps")
    sp.add_argument("--sides", type=_side_list,
                    help="comma-separated sides out of LA, SA")
    sp.add_argument("--tol", type=float, help="residual tolerance")
    sp.add_argument("--max-iter", type=int, help="operator application budget")

    sp = common("track", "curvature of a frozen direction across time")
    sp.add_argument("--t0", type=int, help="checkpoint the probe comes from")
    sp.add_argument("--rank", type=int, help="probe direction rank")

    sp = common("probe", "true loss vs quadratic model along directions")
    sp.add_argument("--step", type=int, help="checkpoint to analyze")
    sp.add_argument("--alpha-max", type=float, help="profile half-range")
    sp.add_argument("--n-points", type=int, help="odd number of grid points")
    sp.add_argument("--quadratic-test", action="store_true",
                    help="run the exact-quadratic self check instead")

    sp = common("fit", "quadratic refits of profiles over finite ranges")
    sp.add_argument("--step", type=int, help="checkpoint to analyze")
    sp.add_argument("--ranges", type=_float_list,
                    help="comma-separated alpha half-ranges")

    sp = common("linesearch", "empirically optimal step per direction")
    sp.add_argument("--step", type=int, help="checkpoint to analyze")

    sp = common("improve", "optimal-step report with curvature correlations")
    sp.add_argument("--step", type=int, help="checkpoint to analyze")

    sp = common("negcurve", "paired baseline vs curvature-escape runs")
    sp.add_argument("--steps", type=int, dest="nc_steps",
                    help="length of the paired runs")
    sp.add_argument("--beta", type=float,
                    help="step size along the tracked direction")

    common("all", "full pipeline: train through negcurve")
    return parser


_COMMANDS = {"train": cmd_train, "eigen": cmd_eigen, "track": cmd_track,
             "probe": cmd_probe, "fit": cmd_fit, "linesearch": cmd_linesearch,
             "improve": cmd_improve, "negcurve": cmd_negcurve, "all": cmd_all}


def _collect_overrides(args) -> dict:
    mapping = {"output": "output", "seed": "seed",
               "k": "eigen.k", "eigen_steps": "eigen.steps",
               "sides": "eigen.sides", "tol": "eigen.tol",
               "max_iter": "eigen.max_iter",
               "t0": "analysis.t0", "rank": "analysis.rank",
               "step": "analysis.step", "alpha_max": "analysis.alpha_max",
               "n_points": "analysis.n_points", "ranges": "analysis.ranges",
               "nc_steps": "negcurve.steps", "beta": "negcurve.beta"}
    out = {}
    for attr, path in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[path] = value
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides=_collect_overrides(args))
        return _COMMANDS[args.command](config, args)
    except (NonConvergedError, NonFiniteError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ConfigError, IdxFormatError, MissingArtifactError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
