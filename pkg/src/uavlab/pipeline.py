"""Stage functions wiring generation, labeling, featurization, training and evaluation."""
from __future__ import annotations

import functools
import logging
import time
from dataclasses import dataclass

from . import mobility, oracle, rng
from .channel import ChannelParams, UavPose, max_coverage_radius
from .cnn import Sequential, TrainConfig, predict, train
from .dataset import GridConfig, SampleSet, build_samples, split, split_session_ids
from .evaluation import EvalReport, evaluate
from .parallel import pmap
from .rl import (DqnConfig, EnvContext, TabularParams, TabularPolicy, UavCoverageEnv, dqn_train,
                 double_q_learning_train, merge_double, q_learning_train, rl_policy_positions)

log = logging.getLogger(__name__)


def _gen_one(args):
    i, master_seed, cfg = args
    return mobility.generate_session(i, rng.split(master_seed, i), cfg)


def generate(n_sessions: int, master_seed: int, cfg=mobility.ScenarioConfig(), threads=None):
    if n_sessions < 1:
        raise ValueError("n_sessions must be >= 1")
    return pmap(_gen_one, [(i, master_seed, cfg) for i in range(n_sessions)], threads)


def _label_one(session, p, area):
    return session.id, oracle.label_session(session, p, area)


def label(sessions, p: ChannelParams, area, threads=None) -> dict:
    fn = functools.partial(_label_one, p=p, area=area)
    return dict(pmap(fn, sessions, threads))


def cnn_poses(model: Sequential, samples: SampleSet, area, h: float) -> dict:
    xy = predict(model, samples.features)
    return {(int(s), int(t)): UavPose(float(x * area[0]), float(y * area[1]), h)
            for (s, t), (x, y) in zip(samples.meta, xy)}


def oracle_poses(labels: dict, sessions, min_step=4) -> dict:
    return {(s.id, t): labels[s.id][t].pose for s in sessions for t in range(min_step, len(s.positions))}


def policy_poses(policy, sessions, ctx: EnvContext, min_step=4) -> dict:
    out = {}
    for s in sessions:
        for t, pose in enumerate(rl_policy_positions(policy, s, ctx)):
            if t >= min_step:
                out[(s.id, t)] = pose
    return out


def train_rl(sessions, algo: str, ctx: EnvContext, tabular: TabularParams = TabularParams(),
             dqn: DqnConfig = DqnConfig()):
    """Returns the trained artifact: a Q-table, a merged Double-Q table or a DqnModel."""
    env = UavCoverageEnv(sessions, ctx)
    if algo == "q":
        return q_learning_train(env, tabular)
    if algo == "double_q":
        return merge_double(*double_q_learning_train(env, tabular))
    if algo == "dqn":
        return dqn_train(env, dqn)
    raise ValueError(f"unknown RL algorithm {algo!r}")


def as_policy(artifact):
    return artifact if hasattr(artifact, "act") else TabularPolicy(artifact)


@dataclass
class PipelineConfig:
    n_sessions: int = 8100
    fractions: tuple = (6000 / 8100, 600 / 8100, 1500 / 8100)
    master_seed: int = 2024
    split_seed: int = 7
    scenario: mobility.ScenarioConfig = mobility.ScenarioConfig()
    channel: ChannelParams = ChannelParams()
    grid: GridConfig = GridConfig()
    train: TrainConfig = TrainConfig(float32=True)
    tabular: TabularParams = TabularParams()
    tabular_passes: int = 3
    dqn: DqnConfig = DqnConfig()
    threads: int | None = None


@dataclass
class PipelineResult:
    report: EvalReport
    model: Sequential
    history: object
    sessions: dict
    labels: dict
    split_ids: tuple
    timings: dict
    rl: dict


def run_pipeline(cfg: PipelineConfig, rl_algos=("q", "double_q", "dqn")) -> PipelineResult:
    """End-to-end desk-scale experiment: returns the evaluation on the test sessions."""
    timings = {}
    area = cfg.scenario.area
    t0 = time.perf_counter()
    sessions = {s.id: s for s in generate(cfg.n_sessions, cfg.master_seed, cfg.scenario, cfg.threads)}
    timings["generate_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    labels = label(list(sessions.values()), cfg.channel, area, cfg.threads)
    timings["label_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    samples = build_samples(sessions.values(), labels, cfg.grid, area)
    train_ids, val_ids, test_ids = split_session_ids(list(sessions), cfg.fractions, cfg.split_seed)
    train_set, val_set, test_set = split(samples, cfg.fractions, cfg.split_seed)
    del samples
    timings["dataset_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model, hist = train(train_set, cfg.train, val=val_set)
    del train_set, val_set
    timings["train_cnn_s"] = time.perf_counter() - t0
    log.info("cnn trained in %.0f s", timings["train_cnn_s"])

    ctx = EnvContext(cfg.channel, cfg.grid, area)
    train_sessions = [sessions[i] for i in train_ids]
    tab = TabularParams(**{**cfg.tabular.__dict__, "episodes": cfg.tabular_passes * len(train_sessions)})
    dq = DqnConfig(**{**cfg.dqn.__dict__, "episodes": len(train_sessions)})
    rl = {}
    for algo in rl_algos:
        t0 = time.perf_counter()
        rl[algo] = train_rl(train_sessions, algo, ctx, tab, dq)
        timings[f"train_{algo}_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    test_sessions = [sessions[i] for i in test_ids]
    h = max_coverage_radius(cfg.channel)[1]
    poses = {"oracle": oracle_poses(labels, test_sessions), "cnn": cnn_poses(model, test_set, area, h)}
    for algo, art in rl.items():
        poses[algo] = policy_poses(as_policy(art), test_sessions, ctx)
    report = evaluate(poses, test_sessions, cfg.channel)
    timings["evaluate_s"] = time.perf_counter() - t0
    report.runtime.update(timings)
    return PipelineResult(report, model, hist, sessions, labels, (train_ids, val_ids, test_ids), timings, rl)
