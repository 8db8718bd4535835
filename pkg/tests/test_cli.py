import csv
import io
import math

import pytest

from ponqkd.analytic import analytic_rates
from ponqkd.cli import CSV_HEADER, main, run
from ponqkd.config import load_document, parse_config


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def write(tmp_path):
    def _write(text, name="cfg.toml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


def test_zero_length_ideal_single_bob(write):
    cfg = write(
        '[topology]\nplacement = "SplitterInAlice"\nfan_out = 1\n'
        "[detector]\ndark_prob_per_slot = 0.0\n"
        "[protocol]\nextinction = 0.0\n"
        "[run]\nsweep_lengths_km = [0.0]\n"
    )
    code, out, err = invoke(["--config", cfg])
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["qber"]) == 0.0
    assert row["length_km"] == "0" and row["bob_id"] == "0" and row["mode"] == "analytic"
    assert "qber" in err


def test_config_a_preset_rows_and_trend():
    code, out, _ = invoke(["--preset", "config-a"])
    assert code == 0
    assert out.splitlines()[0] == CSV_HEADER
    rows = rows_of(out)
    assert len(rows) == 32
    keys = [(float(r["length_km"]), int(r["bob_id"])) for r in rows]
    assert keys == sorted(keys)
    for bob in range(8):
        q = [float(r["qber"]) for r in rows if int(r["bob_id"]) == bob]
        assert q == sorted(q)


def test_six_significant_digits():
    doc = load_document(preset="config-a")
    result = run(doc)
    first = result.rows[0]
    line = result.csv_text().splitlines()[1]
    assert line.split(",")[3] == f"{first.qber:.6g}"
    assert all(len(f.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 6 for f in line.split(",")[3:])


def test_config_error_exit_one_without_stdout(write):
    cfg = write('[topology]\nplacement = "SplitterInAlice"\nfan_out = 0\n')
    code, out, err = invoke(["--config", cfg])
    assert (code, out) == (1, "")
    assert "topology.fan_out" in err


def test_missing_config_file_is_config_error(tmp_path):
    code, out, err = invoke(["--config", str(tmp_path / "absent.toml")])
    assert (code, out) == (1, "")
    assert "--config" in err


def test_bad_flag_is_config_error():
    code, out, _ = invoke(["--preset", "nope"])
    assert (code, out) == (1, "")
    assert invoke(["--seed", "abc", "--preset", "p2p"])[0] == 1


def test_runtime_error_exit_two_without_partial_output(tmp_path):
    target = tmp_path / "missing-dir" / "out.csv"
    code, out, err = invoke(["--preset", "p2p", "--out", str(target)])
    assert code == 2
    assert out == ""
    assert not target.exists()
    assert "runtime error" in err


def test_out_file_matches_stdout(tmp_path):
    target = tmp_path / "rates.csv"
    code, out, _ = invoke(["--preset", "config-b", "--out", str(target)])
    assert code == 0 and out == ""
    assert target.read_text() == invoke(["--preset", "config-b"])[1]
    assert [p.name for p in tmp_path.iterdir()] == ["rates.csv"]


def test_seed_override_changes_montecarlo_output():
    base = ["--preset", "p2p", "--mode", "montecarlo", "--slots", "200000"]
    a = invoke(base + ["--seed", "1"])[1]
    b = invoke(base + ["--seed", "1"])[1]
    c = invoke(base + ["--seed", "2"])[1]
    assert a == b
    assert a != c


def test_montecarlo_summary_reports_distillation():
    code, out, err = invoke(["--preset", "p2p", "--mode", "montecarlo", "--slots", "200000"])
    assert code == 0
    assert "distilled key bits" in err
    assert {r["mode"] for r in rows_of(out)} == {"montecarlo"}


def test_montecarlo_rows_agree_with_analytic_qber():
    text = (
        '[topology]\nplacement = "SplitterInAlice"\nfan_out = 2\n'
        "[detector]\ndark_prob_per_slot = 1e-5\n"
        "[run]\nslots = 1000000\nseed = 3\nsweep_lengths_km = [2.0, 6.0]\n"
    )
    doc = parse_config(text)
    mc = run(doc, "montecarlo").rows
    for row in mc:
        expected = analytic_rates(doc.scenario(row.length_km))[row.bob_id]
        conclusive = row.sifted_rate_hz / doc.source.clock_rate_hz * doc.run.slots
        sigma = math.sqrt(expected.qber * (1 - expected.qber) / conclusive)
        assert abs(row.qber - expected.qber) <= 4 * sigma


def test_help_exits_zero():
    assert invoke(["--help"])[0] == 0
