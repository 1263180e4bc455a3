import csv
import json
import logging
import math

import numpy as np
import pytest

from gmib import cli
from gmib.cli import ConfigError, main, parse_config, parse_grid, parse_rate, read_results

LN2 = math.log(2.0)


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_rate_units():
    assert parse_rate("0.693nats", None) == pytest.approx(0.693)
    assert parse_rate("1bits", None) == pytest.approx(LN2)
    assert parse_rate("2", "bits") == pytest.approx(2 * LN2)
    assert parse_rate("2", "nats") == 2.0
    with pytest.raises(ConfigError):
        parse_rate("2", None)
    with pytest.raises(ConfigError):
        parse_rate("two bits", "bits")


def test_suffix_beats_units_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="gmib"):
        v = parse_rate("1bits", "nats")
    assert v == pytest.approx(LN2)
    assert "overrides" in caplog.text


def test_parse_grid():
    g = parse_grid("0:3:0.25", "bits")
    assert len(g) == 13
    assert g[-1] == pytest.approx(3 * LN2)
    assert parse_grid("0:1:0.5nats", "bits") == pytest.approx([0, 0.5, 1.0])
    with pytest.raises(ConfigError):
        parse_grid("0:1bits:0.5nats", None)
    with pytest.raises(ConfigError):
        parse_grid("1:0:0.1", "nats")


def test_curve_unified_dominates(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(["curve", "--beta", "1", "--schemes", "all", "--r-grid", "0:3:0.25", "--units", "bits",
                 "--workers", "1", "--out", str(out)])
    assert code == 0
    rows = rows_of(out)
    assert set(rows[0]) == {"scheme", "beta", "rate_bits", "relevance_bits", "stderr", "converged", "params"}
    by_rate = {}
    for r in rows:
        by_rate.setdefault(round(float(r["rate_bits"]), 6), {})[r["scheme"]] = float(r["relevance_bits"])
    assert len(by_rate) == 13
    for rate, vals in by_rate.items():
        assert "unified" in vals
        assert vals["unified"] >= max(vals.values()) - 1e-9
        assert vals["unified"] <= min(rate, 1.0) + 1e-9
    read_results(out)
    side = json.loads((tmp_path / "curve.csv.json").read_text())
    assert side["config"]["command"] == "curve"
    assert side["rows"] == len(rows)
    assert "version" in side and "wall_time_s" in side


def test_classify_soft_example(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["classify", "--beta", "1.4142", "--schemes", "soft", "--r", "1.3869bits",
                 "--workers", "1", "--out", str(out)]) == 0
    (row,) = rows_of(out)
    assert row["scheme"] == "soft"
    assert float(row["error"]) == pytest.approx(0.0944, abs=2e-3)


def test_vector_example(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["vector", "--betas", "0.9,1,1.1", "--total-rate", "3bits", "--units", "bits",
                 "--workers", "1", "--out", str(out)]) == 0
    (row,) = rows_of(out)
    assert float(row["relevance_bits"]) == pytest.approx(0.7151, abs=0.02)
    assert float(row["rate_bits"]) <= 3 + 1e-6


def test_vector_allocation_must_sum(tmp_path, capsys):
    code = main(["vector", "--betas", "1,1", "--total-rate", "2nats", "--allocation", "1nats,0.5nats",
                 "--out", str(tmp_path / "v.csv")])
    assert code == cli.EXIT_CONFIG
    assert "allocation" in capsys.readouterr().err


def test_same_seed_same_bytes(tmp_path):
    args = ["classify", "--beta", "1", "--schemes", "two_level,det_quant", "--r", "0.5nats,1nats",
            "--mc", "2000", "--seed", "5", "--workers", "1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert any(r["scheme"].endswith("_mc") for r in rows_of(a))


def test_config_errors_list_every_field(tmp_path, capsys):
    code = main(["curve", "--betas", "-1", "--schemes", "bogus", "--seed", "x", "--out", str(tmp_path / "o.csv")])
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    for name in ("betas", "schemes", "seed"):
        assert name in err


def test_unknown_option_is_config_error(tmp_path, capsys):
    assert main(["curve", "--frobnicate", "3", "--out", str(tmp_path / "o.csv")]) == cli.EXIT_CONFIG
    assert "--frobnicate" in capsys.readouterr().err


def test_missing_input_is_io_error(tmp_path):
    code = main(["mnist", "--images", str(tmp_path / "nope-images-idx3-ubyte"), "--out", str(tmp_path / "o.csv")])
    assert code == cli.EXIT_IO


def test_bad_magic_is_io_error(tmp_path, capsys):
    img = tmp_path / "x-images-idx3-ubyte"
    img.write_bytes(b"\x00\x00\x09\x99" + bytes(20))
    (tmp_path / "x-labels-idx1-ubyte").write_bytes(b"\x00\x00\x08\x01" + bytes(4))
    assert main(["mnist", "--images", str(img), "--out", str(tmp_path / "o.csv")]) == cli.EXIT_IO
    assert "offset 0" in capsys.readouterr().err


def test_singular_data_is_numeric_error(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    lines = [f"{7 if k % 2 else 9}," + ",".join(["0.5"] * 6) for k in range(40)]
    path.write_text("\n".join(lines) + "\n")
    code = main(["mnist", "--images", str(path), "--format", "csv", "--out", str(tmp_path / "o.csv")])
    assert code == cli.EXIT_NUMERIC
    assert "singular" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"betas": [1.0], "r": ["1bits"], "schemes": ["two_level"], "seed": 4}))
    cfg = parse_config(["curve", "--config", str(conf), "--betas", "0.6"])
    assert cfg.betas == [0.6]
    assert cfg.rates == pytest.approx([LN2])
    assert cfg.schemes == ["two_level"]
    assert cfg.seed == 4


def test_config_file_unknown_key(tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        parse_config(["curve", "--config", str(conf)])


def test_workers_precedence(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert parse_config(["curve"]).workers == 3
    assert parse_config(["curve", "--workers", "2"]).workers == 2
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        parse_config(["curve"])


def test_read_results_rejects_excess_relevance(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("scheme,beta,rate_bits,relevance_bits,stderr,converged,params\n"
                    "x,1,0.5,0.4,,true,\n"
                    "x,1,0.5,0.7,,true,\n")
    with pytest.raises(ValueError, match="line 3"):
        read_results(path)


def test_baselines_small(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["baselines", "--betas", "1", "--grid-size", "60", "--lambdas", "2,5", "--restarts", "1",
                 "--solvers", "all", "--w-grid=-4:4:4", "--units", "bits", "--out", str(out)])
    assert code == 0
    rows = rows_of(out)
    assert {r["scheme"] for r in rows} == {"ba", "agg_ib", "seq_ib", "det_ib", "info_dropout"}
    for r in rows:
        assert float(r["relevance_bits"]) <= min(float(r["rate_bits"]), 1.0) + 1e-6
    read_results(out)


def test_mnist_small(tmp_path, digits_idx):
    img, _ = digits_idx
    out = tmp_path / "m.csv"
    code = main(["mnist", "--images", str(img), "--budgets", "1,2", "--units", "bits", "--w-grid=-2:2:2",
                 "--out", str(out)])
    assert code == 0
    rows = rows_of(out)
    assert sum(r["scheme"] == "unified" for r in rows) == 2
    assert sum(r["scheme"] == "info_dropout" for r in rows) == 9
    errs = np.array([float(r["error"]) for r in rows])
    assert np.all((errs >= 0) & (errs <= 1))
