import csv

import pytest

from toric_lab.cli import cli_main, parse_p_list


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_p_list():
    assert parse_p_list("0.01:0.15:0.01") == tuple(round(0.01 * k, 10) for k in range(1, 16))
    assert parse_p_list("0.08:0.12:0.005")[-1] == 0.12
    assert len(parse_p_list("0.08:0.12:0.005")) == 9
    assert parse_p_list("0.05,0.1") == (0.05, 0.1)


def test_sweep_row_count_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("TORIC_LAB_THREADS", "1")
    args = ["sweep", "--decoder", "mwpm", "--d", "5", "--p", "0.01:0.15:0.01", "--trials", "1000", "--seed", "7"]
    assert cli_main(args + ["--out", str(tmp_path / "r.csv"), "--hist", str(tmp_path / "h.csv")]) == 0
    got = rows(tmp_path / "r.csv")
    assert got[0] == ["d", "p", "trials", "successes", "rate", "ci_lo", "ci_hi", "mean_steps"]
    assert len(got) == 16
    assert rows(tmp_path / "h.csv")[0] == ["d", "p", "steps", "count"]
    assert (tmp_path / "r.csv.meta.json").exists()
    assert cli_main(args + ["--out", str(tmp_path / "r2.csv"), "--hist", str(tmp_path / "h2.csv")]) == 0
    assert (tmp_path / "r.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()
    assert (tmp_path / "h.csv").read_bytes() == (tmp_path / "h2.csv").read_bytes()


def test_usage_errors_exit_2(capsys):
    assert cli_main(["bogus"]) == 2
    assert cli_main(["sweep", "--nope"]) == 2
    assert cli_main([]) == 2
    assert cli_main(["--help"]) == 0


def test_invalid_config_nonzero(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"network": {"d": 4}, "schedule": {}}')
    assert cli_main(["train", "--config", str(bad), "--out", str(tmp_path / "x.ckpt")]) != 0
    assert cli_main(["sweep", "--decoder", "rl", "--d", "3", "--p", "0.1", "--out", str(tmp_path / "y.csv")]) == 1
    assert cli_main(["sweep", "--decoder", "mwpm", "--d", "4", "--p", "0.1", "--out", str(tmp_path / "y.csv")]) == 1


def test_train_evaluate_compare_threshold(tmp_path, monkeypatch):
    monkeypatch.setenv("TORIC_LAB_THREADS", "1")
    ck = tmp_path / "d3.ckpt"
    base = ["train", "--preset", "d3", "--seed", "1", "--iterations", "15"]
    assert cli_main(base + ["--out", str(ck)]) == 0
    log = tmp_path / "d3.ckpt.log.csv"
    assert ck.exists() and log.exists()
    assert rows(log)[0] == ["iter", "epsilon", "p", "steps", "success", "mean_loss", "wall_ms"]
    assert len(rows(log)) == 16
    assert cli_main(base + ["--out", str(tmp_path / "again.ckpt")]) == 0
    assert log.read_bytes() == (tmp_path / "again.ckpt.log.csv").read_bytes()

    ev = ["evaluate", "--checkpoint", str(ck), "--p", "0.05,0.1", "--trials", "50", "--seed", "2"]
    assert cli_main(ev + ["--out", str(tmp_path / "e1.csv")]) == 0
    assert cli_main(ev + ["--out", str(tmp_path / "e2.csv")]) == 0
    assert (tmp_path / "e1.csv").read_bytes() == (tmp_path / "e2.csv").read_bytes()
    assert cli_main(ev + ["--d", "5", "--out", str(tmp_path / "e3.csv")]) == 1

    cmp = ["compare", "--first", str(ck), "--second", str(ck), "--p", "0.1", "--trials", "40", "--seed", "3"]
    assert cli_main(cmp + ["--out", str(tmp_path / "c1.csv"), "--hist", str(tmp_path / "ch1.csv")]) == 0
    assert cli_main(cmp + ["--out", str(tmp_path / "c2.csv"), "--hist", str(tmp_path / "ch2.csv")]) == 0
    assert (tmp_path / "c1.csv").read_bytes() == (tmp_path / "c2.csv").read_bytes()
    assert (tmp_path / "ch1.csv").read_bytes() == (tmp_path / "ch2.csv").read_bytes()
    assert rows(tmp_path / "c1.csv")[0][0] == "agent"

    for d in (3, 5):
        b = ["mwpm-bench", "--d", str(d), "--p", "0.06:0.14:0.04", "--trials", "300", "--seed", "4"]
        assert cli_main(b + ["--out", str(tmp_path / f"b{d}.csv")]) == 0
        assert cli_main(b + ["--out", str(tmp_path / f"b{d}x.csv")]) == 0
        assert (tmp_path / f"b{d}.csv").read_bytes() == (tmp_path / f"b{d}x.csv").read_bytes()
    th = ["threshold", "--curves", str(tmp_path / "b3.csv"), str(tmp_path / "b5.csv")]
    assert cli_main(th + ["--out", str(tmp_path / "t1.csv")]) == 0
    assert cli_main(th + ["--out", str(tmp_path / "t2.csv")]) == 0
    assert (tmp_path / "t1.csv").read_bytes() == (tmp_path / "t2.csv").read_bytes()
    assert rows(tmp_path / "t1.csv")[0] == ["d_a", "d_b", "p_cross"]


def test_print_config(capsys):
    assert cli_main(["train", "--preset", "d5_mad", "--print-config"]) == 0
    assert '"reward_mode": "minimum_action"' in capsys.readouterr().out
