import csv
import json
import math

import numpy as np
import pytest

from charpoly import cli
from charpoly.analytics.stats import ks_2samp
from charpoly.rng import RngStream
from charpoly.samplers import sample_unitary_log_charpoly


def run(argv, capsys=None):
    try:
        code = cli.main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    return code


def records(path):
    lines = [json.loads(x) for x in open(path)]
    return [r for r in lines if "header" not in r]


def test_sample_unitary_n1(tmp_path):
    out = tmp_path / "a.jsonl"
    assert run(["--seed", "7", "sample", "--n", "1", "--samples", "3", "--out", str(out)]) == 0
    lines = [json.loads(x) for x in open(out)]
    assert "header" in lines[0] and lines[0]["header"]["schema_version"] == cli.SCHEMA_VERSION
    recs = lines[1:]
    assert len(recs) == 3
    for i, r in enumerate(recs):
        assert set(r) >= {"n", "group", "sampler", "re_log", "im_log", "stream_id", "index",
                          "schema_version", "seed"}
        assert -math.pi / 2 < r["im_log"] <= math.pi / 2
        assert (r["seed"], r["n"], r["group"]) == (7, 1, "unitary")
    assert [r["index"] for r in recs] == [0, 1, 2]


def test_sample_so2n_is_real(tmp_path):
    out = tmp_path / "so.jsonl"
    assert run(["sample", "--group", "so2n", "--n", "2", "--samples", "50", "--out", str(out)]) == 0
    assert all(r["im_log"] == 0 for r in records(out))


def test_sample_deterministic_and_worker_independent(tmp_path):
    a, b, c = (tmp_path / f"{k}.jsonl" for k in "abc")
    base = ["--seed", "9", "--no-header", "sample", "--n", "4", "12", "--samples", "101"]
    assert run(base + ["--out", str(a)]) == 0
    assert run(base + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(base + ["--workers", "3", "--out", str(c)]) == 0
    recs = records(c)
    assert len(recs) == 202
    keys = [(r["n"], r["stream_id"], r["index"]) for r in recs]
    assert keys == sorted(keys, key=lambda k: (k[0] != 4, k[1], k[2]))
    assert len({r["stream_id"] for r in recs}) == 6


def test_sample_values_round_trip(tmp_path):
    out = tmp_path / "r.jsonl"
    run(["--seed", "5", "--no-header", "sample", "--n", "6", "--samples", "20", "--out", str(out)])
    ref = sample_unitary_log_charpoly(6, 20, RngStream(5, 0))
    got = records(out)
    assert np.array_equal([r["re_log"] for r in got], ref.re_log)
    assert np.array_equal([r["im_log"] for r in got], ref.im_log)


def test_sample_csv(tmp_path):
    out = tmp_path / "a.csv"
    assert run(["sample", "--n", "3", "--samples", "4", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# {")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 4 and float(rows[0]["re_log"]) == pytest.approx(float(rows[0]["re_log"]))
    assert {"seed", "stream_id", "schema_version"} <= set(rows[0])


def test_joint_sampler_flag(tmp_path):
    out = tmp_path / "j.jsonl"
    assert run(["--no-header", "sample", "--n", "3", "--samples", "5", "--sampler", "joint",
                "--out", str(out)]) == 0
    assert {r["sampler"] for r in records(out)} == {"joint"}
    assert run(["sample", "--group", "so2n", "--sampler", "joint", "--n", "2"]) == 2


def test_usage_errors(capsys):
    assert run(["sample", "--samples", "3"]) == 2
    assert "--n" in capsys.readouterr().err
    assert run(["sample", "--n", "0"]) == 2
    assert run(["frobnicate"]) == 2
    assert run(["validate", "selberg"]) == 2


def test_unwritable_path(tmp_path):
    assert run(["sample", "--n", "2", "--out", str(tmp_path / "missing" / "x.jsonl")]) == 3


@pytest.mark.parametrize("argv,expected", [
    (["--n", "5", "--t", "2"], math.log(6)),
    (["--group", "so2n", "--n", "1", "--t", "2"], math.log(6)),
    (["--n", "8", "--t", "0", "--s", "0"], 0.0),
])
def test_moments(tmp_path, argv, expected):
    out = tmp_path / "m.jsonl"
    assert run(["moments", *argv, "--out", str(out)]) == 0
    (rec,) = records(out)
    assert rec["log_moment"] == pytest.approx(expected, abs=1e-13)


def test_moments_domain_error(capsys):
    assert run(["moments", "--n", "5", "--t", "1", "--s", "3"]) == 2
    io = capsys.readouterr()
    assert "Re(t±s) > -1" in io.err and io.out == ""


def test_moments_empirical(tmp_path):
    out = tmp_path / "m.jsonl"
    assert run(["--seed", "2", "moments", "--n", "5", "--t", "2", "--empirical", "100000",
                "--out", str(out)]) == 0
    (rec,) = records(out)
    assert rec["samples"] == 100_000 and abs(rec["z_score"]) <= 5


def test_validate_exit_codes(tmp_path, capsys):
    out = tmp_path / "v.jsonl"
    assert run(["--seed", "1", "validate", "mellin", "--n", "5", "--samples", "100000",
                "--out", str(out)]) == 0
    recs = records(out)
    assert recs and all(r["pass"] for r in recs) and all(r["z_score"] is None or abs(r["z_score"]) <= 5 for r in recs)
    assert "validation passed" in capsys.readouterr().err
    # a zero z threshold cannot be met by noisy estimates
    assert run(["validate", "mellin", "--n", "5", "--samples", "2000", "--z", "0",
                "--out", str(out)]) == 1


def test_validate_low_power_warning(tmp_path, capsys):
    out = tmp_path / "v.jsonl"
    run(["validate", "betagamma", "--samples", "10", "--out", str(out)])
    assert "low power" in capsys.readouterr().err
    assert all(r["low_power"] for r in records(out))


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 11, "samples": 5, "n": [3], "no_header": True}))
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run(["sample", "--config", str(cfg), "--out", str(a)]) == 0
    assert run(["sample", "--config", str(cfg), "--seed", "12", "--out", str(b)]) == 0
    ra, rb = records(a), records(b)
    assert len(ra) == 5 and {r["seed"] for r in ra} == {11} and {r["seed"] for r in rb} == {12}
    assert a.read_text().count("header") == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"frobs": 1}))
    assert run(["sample", "--config", str(bad)]) == 2


def test_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    out = tmp_path / "w.jsonl"
    run(["--no-header", "sample", "--n", "3", "--samples", "10", "--out", str(out)])
    assert {r["stream_id"] for r in records(out)} == {0, 1}


def test_lil(tmp_path):
    out = tmp_path / "l.jsonl"
    assert run(["--no-header", "lil", "--n-max", "10000", "--out", str(out)]) == 0
    recs = records(out)
    ns = [r["n"] for r in recs]
    assert ns == sorted(ns) and ns[-1] == 10_000 and len(set(ns)) == len(ns)
    assert all(math.isfinite(r["re_log"]) and math.isfinite(r["im_log"]) for r in recs)
    for r in recs:
        if r["n"] < cli.LIL_MIN_N:
            assert r["lil_re"] is None and r["note"]
        else:
            assert math.isfinite(r["lil_re"])
    assert run(["lil", "--n-max", "50"]) == 2


def test_lil_statistics_nulls():
    s = cli.lil_statistics(10, 1.0, 1.0)
    assert s["lil_re"] is None and s["petrov_re"] is None and "16" in s["note"]
    s = cli.lil_statistics(10 ** 6, 1.0, -1.0)
    assert s["lil_im"] == pytest.approx(-1 / math.sqrt(math.log(1e6) * math.log(math.log(math.log(1e6)))))
    assert s["note"] is None


def test_lil_final_marginal_matches_direct(tmp_path):
    out = tmp_path / "l.jsonl"
    run(["--seed", "3", "--no-header", "lil", "--n-max", "1000", "--trajectories", "1000",
         "--checkpoints", "100", "1000", "--out", str(out)])
    final = [r["re_log"] for r in records(out) if r["n"] == 1000]
    direct = sample_unitary_log_charpoly(1000, 1000, RngStream(99))
    assert len(final) == 1000 and ks_2samp(final, direct.re_log).pvalue >= 1e-3


def test_bench(tmp_path):
    out = tmp_path / "b.jsonl"
    assert run(["--no-header", "bench", "--n", "8", "100000", "--samples", "50", "--out", str(out)]) == 0
    small, big = records(out)
    assert small["matrix_seconds_per_draw"] > 0 and small["speedup"] > 0
    assert "matrix_seconds_per_draw" not in big and big["product_seconds_per_draw"] > 0
