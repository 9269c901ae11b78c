"""Coverage comparison of placement methods against the oracle, and runtime benchmarks."""
from __future__ import annotations

import csv
import math
import os
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, UavPose, covered_mask
from .errors import ValidationError

METHODS = ("oracle", "cnn", "q", "double_q", "dqn")


def coverage_of(pose: UavPose, snapshot, p: ChannelParams) -> int:
    positions = snapshot.positions if hasattr(snapshot, "positions") else snapshot
    return int(np.count_nonzero(covered_mask(pose, positions, p)))


@dataclass
class EvalReport:
    n_users: int
    instants: list  # [(session_id, step)], sorted
    covered: dict  # method -> int array aligned with instants
    pos_error_m: dict = field(default_factory=dict)  # method -> float array
    runtime: dict = field(default_factory=dict)  # free-form wall-clock stats

    @property
    def methods(self) -> list:
        return list(self.covered)

    def gaps(self, method: str) -> np.ndarray:
        return self.covered["oracle"] - self.covered[method]

    def mean_gap(self, method: str) -> float:
        return float(self.gaps(method).mean())

    def cdf(self, method: str) -> np.ndarray:
        """P(covered <= k) for k = 0..n_users."""
        counts = np.bincount(self.covered[method], minlength=self.n_users + 1)
        return np.cumsum(counts) / counts.sum()

    def summary(self) -> list[dict]:
        rows = []
        for m in self.methods:
            g = self.gaps(m)
            err = self.pos_error_m.get(m)
            rows.append({
                "method": m,
                "instants": len(g),
                "mean_covered": float(self.covered[m].mean()),
                "mean_gap": float(g.mean()),
                "median_gap": float(np.median(g)),
                "max_gap": int(g.max()),
                "mean_pos_error_m": float(err.mean()) if err is not None else math.nan,
            })
        return rows


def evaluate(method_poses: dict, sessions, p: ChannelParams, min_step: int = 4) -> EvalReport:
    """Score every method's poses on every instant (step >= ``min_step``) of ``sessions``.

    ``method_poses[name][(session_id, step)]`` is a UavPose; ``"oracle"`` is
    required. All methods must cover exactly the same instants.
    """
    if "oracle" not in method_poses:
        raise ValidationError("evaluation needs the oracle poses")
    snaps = {(s.id, t): s.positions[t] for s in sessions for t in range(min_step, len(s.positions))}
    instants = sorted(snaps)
    want = set(instants)
    n_users = {len(v) for v in snaps.values()}
    if len(n_users) != 1:
        raise ValidationError("sessions have differing user counts")
    covered, err = {}, {}
    oracle = method_poses["oracle"]
    for name, poses in method_poses.items():
        got = set(poses)
        if got != want:
            missing, extra = sorted(want - got)[:3], sorted(got - want)[:3]
            raise ValidationError(f"method {name}: instant set mismatch (missing {missing}, extra {extra})")
        covered[name] = np.array([coverage_of(poses[k], snaps[k], p) for k in instants], dtype=np.int64)
        err[name] = np.array([math.hypot(poses[k].x - oracle[k].x, poses[k].y - oracle[k].y)
                              for k in instants])
    return EvalReport(n_users.pop(), instants, covered, err)


def bench_runtime(oracle_fn, cnn_fn, instances, repeats: int = 1):
    """Median wall-clock seconds per instance of each callable and their ratio.

    ``oracle_fn`` and ``cnn_fn`` take one instance. One untimed warm-up call
    per callable precedes the measurement.
    """
    instances = list(instances)
    if not instances:
        raise ValidationError("no benchmark instances")

    def med(fn):
        fn(instances[0])
        times = []
        for inst in instances:
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn(inst)
                best = min(best, time.perf_counter() - t0)
            times.append(best)
        return statistics.median(times)

    t_oracle, t_cnn = med(oracle_fn), med(cnn_fn)
    return t_oracle, t_cnn, t_oracle / t_cnn


def export_report(report: EvalReport, out_dir) -> dict:
    """Write report_summary.csv, report_cdf.csv, report_series.csv and report_summary.txt."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {k: os.path.join(out_dir, f"report_{k}.csv") for k in ("summary", "cdf", "series")}
    summary = report.summary()
    with open(paths["summary"], "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0]), lineterminator="\n")
        w.writeheader()
        for row in summary:
            w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in row.items()})
    with open(paths["cdf"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "covered", "cum_prob"])
        for m in report.methods:
            for k, c in enumerate(report.cdf(m)):
                w.writerow([m, k, format(float(c), ".17g")])
    with open(paths["series"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "step", "covered"])
        for m in report.methods:
            for i, c in enumerate(report.covered[m]):
                w.writerow([m, i, int(c)])
    paths["text"] = os.path.join(out_dir, "report_summary.txt")
    with open(paths["text"], "w", encoding="utf-8") as fh:
        fh.write(f"instants evaluated: {len(report.instants)}  users per instant: {report.n_users}\n")
        for row in summary:
            fh.write(f"{row['method']:>9}: mean covered {row['mean_covered']:.3f}  mean gap {row['mean_gap']:.3f}"
                     f"  median gap {row['median_gap']:.1f}  mean position error {row['mean_pos_error_m']:.1f} m\n")
        for k, v in report.runtime.items():
            fh.write(f"{k}: {v}\n")
    return paths


def read_report(out_dir) -> dict:
    """Parse the CSV tables written by :func:`export_report`."""
    def rows(name):
        with open(os.path.join(out_dir, f"report_{name}.csv"), newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    series: dict = {}
    for r in rows("series"):
        series.setdefault(r["method"], []).append(int(r["covered"]))
    cdf: dict = {}
    for r in rows("cdf"):
        cdf.setdefault(r["method"], []).append(float(r["cum_prob"]))
    summary = {r["method"]: {k: float(v) for k, v in r.items() if k != "method"} for r in rows("summary")}
    return {"series": series, "cdf": cdf, "summary": summary}
