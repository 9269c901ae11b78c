import csv
import subprocess
import sys

import pytest

from uavlab.cli import build_parser, main
from uavlab.config import RunConfig, all_keys, dump_config, load_config, parse_config_text
from uavlab.errors import ConfigError


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def smoke(tmp_path_factory):
    """100-session run through every stage, with short training budgets."""
    d = tmp_path_factory.mktemp("smoke")
    assert run("generate", "--sessions", 100, "--seed", 7, "--out", d / "traj.csv") == 0
    assert run("label", "--traj", d / "traj.csv", "--out", d / "labels.csv") == 0
    assert run("dataset", "--traj", d / "traj.csv", "--labels", d / "labels.csv", "--out", d / "ds.bin") == 0
    assert run("train-cnn", "--dataset", d / "ds.bin", "--out", d / "cnn.bin", "--train.epochs", 1,
               "--train.float32", "true", "--history", d / "hist.csv") == 0
    assert run("train-rl", "--traj", d / "traj.csv", "--algo", "q", "--out", d / "q.csv", "--run.rl_passes", 1) == 0
    assert run("train-rl", "--traj", d / "traj.csv", "--algo", "double_q", "--out", d / "dq.csv",
               "--run.rl_passes", 1) == 0
    assert run("train-rl", "--traj", d / "traj.csv", "--algo", "dqn", "--out", d / "dqn.bin") == 0
    assert run("eval", "--traj", d / "traj.csv", "--labels", d / "labels.csv", "--cnn", d / "cnn.bin",
               "--q", d / "q.csv", "--double-q", d / "dq.csv", "--dqn", d / "dqn.bin", "--out-dir", d / "rep") == 0
    return d


def test_generate_is_byte_identical(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert run("generate", "--sessions", 10, "--seed", 7, "--out", tmp_path / name) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert run("generate", "--sessions", 10, "--seed", 7, "--threads", 2, "--out", tmp_path / "c.csv") == 0
    assert (tmp_path / "c.csv").read_bytes() == (tmp_path / "a.csv").read_bytes()


def test_label_rows(tmp_path):
    run("generate", "--sessions", 10, "--seed", 3, "--out", tmp_path / "t.csv")
    assert run("label", "--traj", tmp_path / "t.csv", "--out", tmp_path / "l.csv") == 0
    with open(tmp_path / "l.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 150


def test_smoke_pipeline_reports(smoke):
    for name in ("report_summary.csv", "report_cdf.csv", "report_series.csv"):
        assert (smoke / "rep" / name).stat().st_size > 0
    with open(smoke / "rep" / "report_summary.csv") as fh:
        methods = [r["method"] for r in csv.DictReader(fh)]
    assert methods == ["oracle", "cnn", "q", "double_q", "dqn"]
    assert (smoke / "hist.csv").read_text().splitlines()[0] == "epoch,train_mae,val_mae"


def test_bench(smoke, capsys):
    assert run("bench", "--cnn", smoke / "cnn.bin", "--users", 10, 30, "--run.bench_instances", 5,
               "--out", smoke / "bench.csv") == 0
    lines = (smoke / "bench.csv").read_text().splitlines()
    assert lines[0] == "n_users,t_oracle_s,t_cnn_s,ratio" and len(lines) == 3


def test_exit_codes(tmp_path, capsys):
    assert run("label", "--traj", tmp_path / "missing.csv", "--out", tmp_path / "x.csv") == 3
    assert capsys.readouterr().err.startswith("error: io:")
    (tmp_path / "bad.cfg").write_text("scenario.nope = 3\n")
    assert run("generate", "--config", tmp_path / "bad.cfg", "--out", tmp_path / "x.csv") == 2
    assert capsys.readouterr().err.startswith("error: config:")
    assert run("generate", "--channel.gamma_db", "abc", "--out", tmp_path / "x.csv") == 2
    capsys.readouterr()
    (tmp_path / "junk.bin").write_bytes(b"UAVDS1" + b"\0" * 40)
    assert run("train-cnn", "--dataset", tmp_path / "junk.bin", "--out", tmp_path / "m.bin") == 4
    assert capsys.readouterr().err.startswith("error: validation:")
    (tmp_path / "t.csv").write_text("session_id,step,mu_id,x_m,y_m\n0,0,0,abc,1\n")
    assert run("label", "--traj", tmp_path / "t.csv", "--out", tmp_path / "x.csv") == 4


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as e:
        run("generate", "--scenario.nope", 1, "--out", "x")
    assert e.value.code != 0


def test_help_lists_every_key():
    out = subprocess.run([sys.executable, "-m", "uavlab", "generate", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for key in all_keys():
        assert f"--{key}" in out
    top = build_parser().format_help()
    for cmd in ("generate", "label", "dataset", "train-cnn", "train-rl", "eval", "bench"):
        assert cmd in top


def test_flag_overrides_file(tmp_path):
    (tmp_path / "c.cfg").write_text("# comment\nrun.sessions = 5\nchannel.gamma_db = 95\n")
    cfg = load_config(tmp_path / "c.cfg", {"run.sessions": "9"})
    assert cfg.run.sessions == 9 and cfg.channel.gamma_db == 95.0
    assert load_config(None, parse_config_text(dump_config(cfg))) == cfg
    with pytest.raises(ConfigError):
        RunConfig.from_values({"bogus.key": 1})
    with pytest.raises(ConfigError):
        parse_config_text("no equals sign")
