import csv
import io

import pytest
from click.testing import CliRunner

from skelmad.cli import main
from tests.conftest import DATA


@pytest.fixture
def cli():
    return CliRunner()


def _kv(output):
    return dict(line.split("=", 1) for line in output.splitlines() if "=" in line and not line.startswith(" "))


def test_run_golden(cli):
    res = cli.invoke(main, ["run", "--machine", "smad", str(DATA / "family_3.lambda")])
    assert res.exit_code == 0, res.output
    kv = _kv(res.output)
    assert kv["beta"] == "24"
    assert kv["result"].startswith("λw") and kv["result"].count("w") == 2


def test_run_identity(cli):
    res = cli.invoke(main, ["run", "--machine", "smad", str(DATA / "id.lambda")])
    assert res.exit_code == 0
    kv = _kv(res.output)
    assert kv["beta"] == "0" and kv["result"] == "λw.w"


def test_run_plain_family(cli):
    res = cli.invoke(main, ["run", "--machine", "mad", str(DATA / "family_3_pure.lambda")])
    assert _kv(res.output)["beta"] == "63"


@pytest.mark.parametrize("backend", ["python", "reference"])
def test_run_backends_agree(cli, backend):
    res = cli.invoke(main, ["run", "--backend", backend, str(DATA / "family_3.lambda")])
    assert res.exit_code == 0
    assert _kv(res.output)["beta"] == "24"


def test_run_trace_and_audit(cli):
    res = cli.invoke(main, ["run", "--trace", "--audit", str(DATA / "family_3.lambda")])
    assert res.exit_code == 0
    rows = [line for line in res.output.splitlines() if "|" in line]
    assert rows[1].startswith("sea1") and rows[2].startswith("beta")


def test_run_rejects_open_terms(cli, tmp_path):
    f = tmp_path / "open.lambda"
    f.write_text(r"\x. y")
    res = cli.invoke(main, ["run", str(f)])
    assert res.exit_code == 1
    assert "free variable y" in res.output


def test_run_reports_parse_errors(cli, tmp_path):
    f = tmp_path / "bad.lambda"
    f.write_text(r"(\x. x")
    res = cli.invoke(main, ["run", str(f)])
    assert res.exit_code == 1
    assert "parse error" in res.output


def test_run_fuel(cli, tmp_path):
    f = tmp_path / "omega.lambda"
    f.write_text(r"(\x. x x) (\y. y y)  # loops")
    res = cli.invoke(main, ["run", "--fuel", "50", str(f)])
    assert res.exit_code == 3


def test_reduce_trace(cli):
    res = cli.invoke(main, ["reduce", "--strategy", "skneed", "--trace", str(DATA / "family_3.lambda")])
    assert res.exit_code == 0
    steps = [line for line in res.output.splitlines() if line.startswith("→_")]
    assert sum(1 for s in steps if s.startswith("→_dB")) == 24
    assert _kv(res.output)["dB"] == "24"


def test_reduce_need(cli):
    res = cli.invoke(main, ["reduce", "--strategy", "need", str(DATA / "family_3_pure.lambda")])
    assert _kv(res.output)["dB"] == "63"


def test_skel(cli, tmp_path):
    f = tmp_path / "v.lambda"
    f.write_text(r"\x. \y. (z w) x (y z)")
    res = cli.invoke(main, ["skel", "--ascii", str(f)])
    assert res.exit_code == 0
    kv = _kv(res.output)
    assert kv["skeleton"] == r"\x. \y. p_1 x (y z)"
    assert kv["flesh p_1"] == "z w"
    assert kv["whiteSize"] == kv["steps"] == "7"


def _bench(cli, *args):
    res = cli.invoke(main, ["bench", *args])
    assert res.exit_code == 0, res.output
    return list(csv.DictReader(io.StringIO(res.output)))


def test_bench_rows(cli):
    rows = _bench(cli, "--family", "0..3", "--machines", "mad,smad")
    assert list(rows[0]) == [
        "n", "machine", "beta", "sk", "ss", "sea1", "sea2", "sea3",
        "finalEnvLen", "maxStateSize", "inkSpaceCalculus", "wallNanos",
    ]
    assert [(r["n"], r["machine"]) for r in rows[:2]] == [("0", "MAD"), ("0", "SMAD")]
    for r in rows:
        n = int(r["n"])
        want = 8 * 2**n + n - 4 if r["machine"] == "MAD" else 6 * n + 4
        assert int(r["beta"]) == want


def test_bench_is_deterministic(cli):
    a = _bench(cli, "--family", "2..5")
    b = _bench(cli, "--family", "2..5")
    for r in a + b:
        r.pop("wallNanos")
    assert a == b


def test_bench_ink(cli):
    rows = _bench(cli, "--family", "1..2", "--machines", "smad", "--ink")
    assert all(int(r["inkSpaceCalculus"]) > 0 for r in rows)


def test_bench_writes_file(cli, tmp_path):
    out = tmp_path / "b.csv"
    res = cli.invoke(main, ["bench", "--family", "0..1", "--out", str(out)])
    assert res.exit_code == 0
    assert out.read_text().count("\n") == 5


def test_bench_refuses_large_plain_runs(cli):
    res = cli.invoke(main, ["bench", "--family", "0..21", "--machines", "mad"])
    assert res.exit_code != 0
    assert "--force" in res.output


def test_check_small_suite(cli):
    res = cli.invoke(main, ["check", "--suite", "skeleton", "--cases", "50"])
    assert res.exit_code == 0
    assert res.output.startswith("PASS skeleton: cases=50")


def test_check_bisim_small(cli):
    res = cli.invoke(main, ["check", "--suite", "bisim", "--cases", "20", "--max-size", "12"])
    assert res.exit_code == 0, res.output
