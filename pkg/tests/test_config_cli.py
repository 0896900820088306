import csv
import os

import numpy as np
import pytest

from gmfading.cli import SCHEMAS, fmt, main
from gmfading.config import ExperimentConfig, load_gain_cov, parse_config
from gmfading.errors import ParseError, ValidationError

from oracles import SISO_RHO1_BITS

MINIMAL = """\
channel.n_tx = 2
channel.n_rx = 3
channel.alpha = 0.5
channel.power = 2
channel.sigma2 = 1
seed = 12345
"""


def test_minimal_document_fills_defaults():
    cfg = parse_config(MINIMAL)
    defaults = ExperimentConfig(channel=cfg.channel, seed=12345)
    assert cfg.channel.n_tx == 2 and cfg.channel.n_rx == 3
    assert cfg.samples == defaults.samples == 100_000
    assert cfg.n_list == [64, 128, 256, 512]
    assert cfg.alphas == [0.5]
    np.testing.assert_array_equal(cfg.channel.gain_cov, np.eye(6))


def test_comments_and_lists():
    cfg = parse_config(MINIMAL + "# note\n\nrates = 0.1, 0.2 # trailing\nlags = 1,3\n")
    assert cfg.rates == [0.1, 0.2] and cfg.lags == [1, 3]


def test_alpha_one_rejected():
    with pytest.raises(ValidationError, match="0 ≤ α < 1"):
        parse_config(MINIMAL.replace("alpha = 0.5", "alpha = 1.0"))


def test_unknown_key_named():
    with pytest.raises(ParseError, match="bogus") as info:
        parse_config(MINIMAL + "bogus = 1\n")
    assert info.value.line == 7 and info.value.key == "bogus"


def test_duplicate_and_malformed_lines():
    with pytest.raises(ParseError, match="duplicate"):
        parse_config(MINIMAL + "seed = 3\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_config("channel.n_tx = 1\nno equals sign\n")


def test_all_violations_reported():
    text = MINIMAL.replace("alpha = 0.5", "alpha = 2").replace("sigma2 = 1", "sigma2 = -1")
    text += "trials = 0\n"
    with pytest.raises(ValidationError) as info:
        parse_config(text.replace("seed = 12345\n", ""))
    v = info.value.violations
    assert len(v) == 4
    assert any("seed" in m for m in v) and any("trials" in m for m in v)


def test_seed_range():
    with pytest.raises(ValidationError):
        parse_config(MINIMAL.replace("12345", str(2 ** 64)))
    assert parse_config(MINIMAL.replace("12345", str(2 ** 64 - 1))).seed == 2 ** 64 - 1


def test_gain_cov_specs(tmp_path):
    assert np.allclose(load_gain_cov("scaled:0.5", 2, tmp_path), 0.5 * np.eye(2))
    K = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
    rows = [" ".join(f"{v.real} {v.imag}" for v in row) for row in K]
    (tmp_path / "k.txt").write_text("\n".join(rows))
    cfg = parse_config(MINIMAL.replace("n_rx = 3", "n_rx = 1") + "channel.gain_cov = file:k.txt\n",
                       base_dir=tmp_path)
    np.testing.assert_allclose(cfg.channel.gain_cov, K)
    with pytest.raises(ValidationError, match="gain_cov"):
        parse_config(MINIMAL + "channel.gain_cov = file:missing.txt\n", base_dir=tmp_path)


def test_threads_auto():
    cfg = parse_config(MINIMAL + "threads = auto\n")
    assert cfg.threads == (os.cpu_count() or 1)


def test_fmt_twelve_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(True) == "true" and fmt(7) == "7"


def write_cfg(tmp_path, extra=""):
    path = tmp_path / "run.cfg"
    path.write_text(MINIMAL.replace("n_tx = 2", "n_tx = 1").replace("n_rx = 3", "n_rx = 1")
                    .replace("power = 2", "power = 1") + extra)
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_capacity_subcommand(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "capacity.csv")
    assert ",".join(rows[0]) == SCHEMAS["capacity"]
    est, se = float(rows[1][7]), float(rows[1][8])
    assert abs(est - SISO_RHO1_BITS) <= 3 * se
    assert rows[1][6] == "12345"
    assert "capacity" in capsys.readouterr().out


def test_bounds_subcommand_default_grid(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["bounds", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "bounds.csv")
    assert ",".join(rows[0]) == SCHEMAS["bounds"]
    assert len(rows) == 1 + 18
    for r in rows[1:]:
        assert float(r[5]) <= float(r[4])


def test_headers_of_every_subcommand(tmp_path):
    cfg = write_cfg(tmp_path, "samples = 2000\ntrials = 100\nn_list = 8\nlag_trials = 500\n"
                              "bound_trials = 1000\ncoding_n = 8\ncoding_trials = 20\n"
                              "draws = 128\nlemma_trials = 10\n")
    out = tmp_path / "o"
    for sub in ("capacity", "optimize", "infodensity", "bounds", "coding", "lemmas"):
        assert main([sub, "--config", str(cfg), "--out", str(out)]) == 0
    for name, header in SCHEMAS.items():
        assert ",".join(read_csv(out / f"{name}.csv")[0]) == header


def test_seed_override_changes_output(tmp_path):
    cfg = write_cfg(tmp_path, "samples = 1000\n")
    main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "7"])
    a = read_csv(tmp_path / "a" / "capacity.csv")[1]
    b = read_csv(tmp_path / "b" / "capacity.csv")[1]
    assert b[6] == "7" and a[7] != b[7]


def test_bad_config_exit_status(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(MINIMAL.replace("alpha = 0.5", "alpha = 1"))
    assert main(["capacity", "--config", str(path)]) == 2
    assert "0 ≤ α < 1" in capsys.readouterr().err
    assert main(["capacity", "--config", str(tmp_path / "absent.cfg")]) == 2
