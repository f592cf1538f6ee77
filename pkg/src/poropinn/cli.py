"""Command-line entry point.

Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 numeric failure.
"""

import argparse
import csv
import os
import sys

import numpy as np

from . import checkpoint, evaluation, fdcheck, net, pde, sampling, training
from .config import load_config
from .errors import CheckpointError, ConfigError, NumericError, UsageError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

LOG_FILE = "log.csv"
CHECKPOINT_FILE = "checkpoint.txt"
CONFIG_ECHO = "config.cfg"
SLICE_FILE = "slice.csv"
PROFILE_FILE = "profile.csv"
NORMS_FILE = "norms.txt"


def _fail(code, msg):
    print(f"poropinn: {msg}", file=sys.stderr)
    return code


def _load(args, **overrides):
    run = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        overrides["train.mode"] = args.mode
    return run.with_overrides(**overrides)


def cmd_train(args):
    try:
        run = _load(args)
        cfg = run.train_config()
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    out = run.output_dir(args.out)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, CONFIG_ECHO), "w") as fh:
        fh.write(run.dumps())

    wall = run["log.wall_clock"]
    stats = training.TrainStats()
    with open(os.path.join(out, LOG_FILE), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(training.LOG_HEADER)

        def on_record(rec):
            writer.writerow(training.log_row(rec, wall))

        try:
            params, log = training.train(
                cfg, stats=stats, on_record=on_record, gradcheck_steps=3 if args.gradcheck else 0
            )
        except NumericError as exc:
            fh.flush()
            return _fail(EXIT_NUMERIC, f"numeric failure: {exc} (partial log in {out})")
        except ConfigError as exc:
            return _fail(EXIT_USAGE, str(exc))
    checkpoint.save_checkpoint(params, stats.final_state, os.path.join(out, CHECKPOINT_FILE))

    mode = "curriculum" if cfg.curriculum else "standard"
    if log:
        print(f"{mode}: {len(log)} epochs, final total loss {log[-1].losses.total:.6e}")
    else:
        print(f"{mode}: 0 epochs")
    print(f"seed {cfg.seed}; outputs in {out}")
    if args.gradcheck:
        bad = [r for r in stats.gradchecks if not r.ok]
        for i, r in enumerate(stats.gradchecks):
            print(f"step {i + 1}: {r.line()}")
        if bad:
            return _fail(EXIT_CHECK, "gradient check failed")
    return EXIT_OK


def cmd_eval(args):
    try:
        run = _load(args)
        if args.slice_t is not None:
            run = run.with_overrides(**{"eval.slice_t": args.slice_t})
        if args.profile_x is not None:
            run = run.with_overrides(**{"eval.profile_x": args.profile_x})
        cfg = run.train_config("standard")
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    try:
        params, _ = checkpoint.load_checkpoint(args.checkpoint)
    except (OSError, CheckpointError) as exc:
        return _fail(EXIT_USAGE, f"cannot load checkpoint: {exc}")
    if params.spec != cfg.net:
        return _fail(EXIT_USAGE, f"checkpoint network {params.spec} does not match config {cfg.net}")
    t = run["eval.slice_t"]
    if not 0.0 <= t <= 1.0:
        return _fail(EXIT_USAGE, "--slice-t must lie in [0, 1]")

    out = run.output_dir(args.out)
    os.makedirs(out, exist_ok=True)
    sp = cfg.solution
    fs = evaluation.field_slice(params, t, run["eval.nx"], run["eval.nz"], sp)
    evaluation.write_slice_csv(fs, os.path.join(out, SLICE_FILE))
    table = evaluation.profile(params, run["eval.profile_x"], nz=run["eval.nz"], sp=sp)
    evaluation.write_profile_csv(table, os.path.join(out, PROFILE_FILE))
    norms = evaluation.error_norms(params, cfg.grid, sp)
    evaluation.write_norms(norms, os.path.join(out, NORMS_FILE))
    for name, (rel, mx) in norms.items():
        print(f"{name}: rel_l2={rel:.4e} max_abs={mx:.4e}")
    return EXIT_OK


def cmd_gradcheck(args):
    try:
        run = _load(args)
        cfg = run.train_config("standard")
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    if args.samples < 1:
        return _fail(EXIT_USAGE, "--samples must be >= 1")
    results = fdcheck.derivative_suite(args.samples, cfg.net, seed=cfg.seed)
    results += fdcheck.identity_suite(1000, cfg.solution, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    for b in range(args.grad_batches):
        params = net.init_params(cfg.net, cfg.seed + b)
        dp = rng.random((16, 3))
        dt = pde.analytic_solution(dp, cfg.solution)
        cp = rng.random((16, 3))
        _, grad = net.grad_scalar(params, training.batch_objective(dp, dt, cp, cfg.solution))
        fd = fdcheck.batch_gradient_oracle(params, dp, dt, cp, cfg.solution)
        results.append(fdcheck.gradient_check(grad.flat(), fd, name=f"parameter gradient batch {b}"))
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_CHECK


def cmd_data(args):
    try:
        run = _load(args)
        cfg = run.train_config()
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    out = run.output_dir(args.out)
    os.makedirs(out, exist_ok=True)
    sp = cfg.solution
    sampling.write_csv(sampling.extract_ic(cfg.grid, sp), os.path.join(out, "ic.csv"))
    sampling.write_csv(sampling.extract_bc(cfg.grid, sp), os.path.join(out, "bc.csv"))
    if cfg.curriculum is None:
        sampling.write_csv(training.standard_stage(cfg).colloc, os.path.join(out, "collocation.csv"))
    else:
        schedule = training.make_schedule(cfg)
        for i in range(schedule.n_intervals):
            sampling.write_csv(schedule.per_interval_data[i], os.path.join(out, f"interval{i}_data.csv"))
            sampling.write_csv(schedule.per_interval_colloc[i], os.path.join(out, f"interval{i}_collocation.csv"))
    print(f"training data written to {out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="poropinn", description="PINN training for 2D poroelasticity")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="key = value configuration file")
        sp.add_argument("--out", metavar="DIR", help="output directory (default: output.dir, $POROPINN_OUT)")
        sp.add_argument("--seed", type=int, metavar="N", help="override the configured seed")

    t = sub.add_parser("train", help="train a network")
    common(t)
    t.add_argument("--mode", choices=("standard", "curriculum"))
    t.add_argument("--gradcheck", action="store_true",
                   help="finite-difference check of the gradient on the first 3 steps")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="compare a checkpoint against the analytical solution")
    common(e)
    e.add_argument("--checkpoint", required=True, metavar="PATH")
    e.add_argument("--slice-t", type=float, metavar="F")
    e.add_argument("--profile-x", type=float, metavar="F")
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("gradcheck", help="derivative and residual-identity conformance suites")
    common(g)
    g.add_argument("--samples", type=int, default=100, metavar="N")
    g.add_argument("--grad-batches", type=int, default=1, metavar="N")
    g.set_defaults(func=cmd_gradcheck)

    d = sub.add_parser("data", help="export training data and collocation points as CSV")
    common(d)
    d.add_argument("--mode", choices=("standard", "curriculum"))
    d.set_defaults(func=cmd_data)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
