"""Command-line front end: one subcommand per pipeline stage.

Every ``section.key`` of the run configuration is also a ``--section.key``
flag; flags override the config file. Failures print one line
``error: <kind>: <message>`` to stderr and exit with 2 (config), 3 (I/O),
4 (validation) or 5 (divergence).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys


from . import mobility, oracle, pipeline
from .channel import max_coverage_radius
from .cnn import build_cnn, load_model, predict, save_model, train
from .config import RunConfig, all_keys, load_config
from .dataset import build_samples, load_dataset, save_dataset, split, split_session_ids
from .errors import ConfigError, DivergenceError, ValidationError
from .evaluation import bench_runtime, evaluate, export_report
from .rl import EnvContext, load_dqn, load_qtable, save_dqn, save_qtable

EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION, EXIT_DIVERGENCE = 2, 3, 4, 5

# short aliases for the most used keys
_ALIASES = {"run.sessions": "--sessions", "run.seed": "--seed", "run.threads": "--threads"}


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat 'section.key = value' config file")
    g = p.add_argument_group("config keys (override the config file)")
    for key, (typ, default) in all_keys().items():
        names = [f"--{key}"] + ([_ALIASES[key]] if key in _ALIASES else [])
        g.add_argument(*names, dest=key, default=None, metavar=typ.__name__.upper(),
                       help=f"default {default}")


def _config(args) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if "." in k and v is not None}
    return load_config(args.config, overrides)


def _threads(cfg: RunConfig):
    return cfg.run.threads or None


def _sessions(path):
    return {s.id: s for s in mobility.read_trajectories(path)}


def _ctx(cfg: RunConfig) -> EnvContext:
    return EnvContext(cfg.channel, cfg.grid, cfg.scenario.area)


def cmd_generate(args, cfg):
    sessions = pipeline.generate(cfg.run.sessions, cfg.run.seed, cfg.scenario, _threads(cfg))
    mobility.write_trajectories(sessions, args.out)


def cmd_label(args, cfg):
    sessions = list(_sessions(args.traj).values())
    labels = pipeline.label(sessions, cfg.channel, cfg.scenario.area, _threads(cfg))
    oracle.write_labels(labels, args.out)


def cmd_dataset(args, cfg):
    sessions = _sessions(args.traj)
    labels = oracle.read_labels(args.labels)
    save_dataset(build_samples(sessions.values(), labels, cfg.grid, cfg.scenario.area), args.out)


def cmd_train_cnn(args, cfg):
    data = load_dataset(args.dataset)
    tr, va, _ = split(data, cfg.run.fractions, cfg.run.split_seed)
    model, hist = train(tr, cfg.train, val=va)
    save_model(model, args.out)
    if args.history:
        with open(args.history, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_mae,val_mae\n")
            for i, t in enumerate(hist.train_mae):
                v = hist.val_mae[i] if i < len(hist.val_mae) else math.nan
                fh.write(f"{i},{float(t)!r},{float(v)!r}\n")


def cmd_train_rl(args, cfg):
    sessions = _sessions(args.traj)
    train_ids, _, _ = split_session_ids(list(sessions), cfg.run.fractions, cfg.run.split_seed)
    train_sessions = [sessions[i] for i in train_ids]
    tab = cfg.rl.__class__(**{**cfg.rl.__dict__, "episodes": cfg.run.rl_passes * len(train_sessions)})
    dq = cfg.dqn.__class__(**{**cfg.dqn.__dict__, "episodes": len(train_sessions)})
    art = pipeline.train_rl(train_sessions, args.algo, _ctx(cfg), tab, dq)
    if args.algo == "dqn":
        save_dqn(art, args.out)
    else:
        save_qtable(art, args.out)


def cmd_eval(args, cfg):
    sessions = _sessions(args.traj)
    labels = oracle.read_labels(args.labels)
    _, _, test_ids = split_session_ids(list(sessions), cfg.run.fractions, cfg.run.split_seed)
    test = [sessions[i] for i in test_ids]
    area = cfg.scenario.area
    h = max_coverage_radius(cfg.channel)[1]
    poses = {"oracle": pipeline.oracle_poses(labels, test)}
    if args.cnn:
        samples = build_samples(test, labels, cfg.grid, area)
        poses["cnn"] = pipeline.cnn_poses(load_model(args.cnn), samples, area, h)
    for name, path in (("q", args.q), ("double_q", args.double_q)):
        if path:
            poses[name] = pipeline.policy_poses(pipeline.as_policy(load_qtable(path)), test, _ctx(cfg))
    if args.dqn:
        poses["dqn"] = pipeline.policy_poses(load_dqn(args.dqn), test, _ctx(cfg))
    export_report(evaluate(poses, test, cfg.channel), args.out_dir)


def cmd_bench(args, cfg):
    r, h = max_coverage_radius(cfg.channel)
    model = load_model(args.cnn) if args.cnn else build_cnn((cfg.grid.rows, cfg.grid.cols, cfg.grid.temporal_depth))
    rows = ["n_users,t_oracle_s,t_cnn_s,ratio"]
    for n in args.users:
        scen = cfg.scenario.__class__(**{**cfg.scenario.__dict__, "n_users": n})
        sessions = pipeline.generate(cfg.run.bench_instances, cfg.run.seed, scen, 1)
        samples = build_samples(sessions, {s.id: [oracle.PlacementResult(
            oracle.UavPose(0.0, 0.0, h), 0)] * len(s.positions) for s in sessions}, cfg.grid, scen.area)
        users = [s.positions[-1] for s in sessions]
        feats = [samples.features[i] for i in range(len(samples)) if samples.meta[i, 1] == len(sessions[0].positions) - 1]
        pairs = list(zip(users, feats))
        t_o, t_c, ratio = bench_runtime(lambda u: oracle.optimal_placement_exact(u[0], r, scen.area, h),
                                        lambda u: predict(model, u[1]), pairs)
        rows.append(f"{n},{t_o!r},{t_c!r},{ratio!r}")
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavlab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        _add_config_flags(sp)
        sp.set_defaults(func=fn)
        return sp

    sp = add("generate", cmd_generate, "generate mobile-user trajectories")
    sp.add_argument("--out", required=True)
    sp = add("label", cmd_label, "compute oracle placements for every instant")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--out", required=True)
    sp = add("dataset", cmd_dataset, "featurize trajectories and labels into a binary dataset")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--out", required=True)
    sp = add("train-cnn", cmd_train_cnn, "train the placement CNN")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--history", help="optional CSV of per-epoch MAE")
    sp = add("train-rl", cmd_train_rl, "train an RL baseline")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--algo", required=True, choices=["q", "double_q", "dqn"])
    sp.add_argument("--out", required=True)
    sp = add("eval", cmd_eval, "compare methods on the test sessions")
    sp.add_argument("--traj", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--cnn")
    sp.add_argument("--q")
    sp.add_argument("--double-q", dest="double_q")
    sp.add_argument("--dqn")
    sp.add_argument("--out-dir", required=True)
    sp = add("bench", cmd_bench, "time the exact oracle against CNN inference")
    sp.add_argument("--cnn")
    sp.add_argument("--users", type=int, nargs="+", default=[10, 20, 30])
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = _config(args)
        args.func(args, cfg)
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"error: divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValidationError as e:
        print(f"error: validation: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
