import json
from fractions import Fraction as F

import pytest

from khkmaps.cli import main, parse_point, parse_scalar


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, [json.loads(line) for line in out]


def test_scalar_literals():
    assert parse_scalar("1/3") == F(1, 3) and isinstance(parse_scalar("2"), F)
    assert isinstance(parse_scalar("0.333"), float) and isinstance(parse_scalar("1e-2"), float)
    assert parse_point("1/3,-1/5") == (F(1, 3), F(-1, 5))


@pytest.mark.parametrize("h,kind", [("-9/4", "ellipse"), ("-5/2", "point"), ("-2", "parabola"), ("-3/2", "two_lines")])
def test_classify(capsys, h, kind):
    code, (out,) = run(capsys, "classify", "--system", "petrera_suris", "--eps", "1", "--h", h)
    assert code == 0 and out["kind"] == kind


def test_missing_h_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["classify", "--system", "petrera_suris", "--eps", "1"])
    assert info.value.code == 2
    assert json.loads(capsys.readouterr().out)["error"] == "UsageError"


def test_rotation(capsys):
    code, (out,) = run(capsys, "rotation", "--system", "S1", "--eps", "1", "--basin", "O1")
    assert out["rho"] == 0.25 and out["rational"] == "1/4"
    code, (out,) = run(capsys, "rotation", "--system", "petrera_suris", "--eps", "0.01", "--h", "-2.49999")
    assert abs(out["rho"] - 0.996817) < 1e-6
    code, (out,) = run(capsys, "rotation", "--system", "S1", "--eps", "0", "--basin", "O1")
    assert out["rho"] == 0


def test_find_eps(capsys):
    code, (out,) = run(capsys, "find-eps", "--system", "S1", "--period", "5")
    assert code == 0 and len(out["eps"]) == 4
    assert any(abs(v - 0.7265425284) < 1e-8 for v in out["eps"])


def test_find_h_precondition(capsys):
    code, (out,) = run(capsys, "find-h", "--system", "petrera_suris", "--eps", "0.01", "--period", "2")
    assert code == 1 and out["error"] == "AnalysisError"


def test_verify_suite(capsys):
    code, outs = run(capsys, "verify", "--system", "S1", "--eps", "1/3", "--checks", "integral,lie,measure,commute")
    assert code == 0 and [o["verdict"] for o in outs] == ["holds"] * 4


def test_verify_failure_exit_code(capsys):
    code, (out,) = run(capsys, "verify", "--system", "S2", "--eps", "1/2", "--checks", "integral")
    assert code == 1 and out["verdict"] == "fails" and out["witness"]


def test_verify_pseudo_numeric(capsys):
    code, outs = run(capsys, "verify", "--system", "S2star", "--eps", "1/2", "--pseudo", "--checks", "integral,lie")
    assert code == 0 and all(o["mode"] == "numeric" for o in outs)


def test_moebius(capsys):
    code, (out,) = run(capsys, "moebius", "--system", "S1", "--eps", "1/2", "--h", "1")
    assert code == 0 and F(out["delta"]) < 0 and out["kind"] == "rotation" and "rho" in out


def test_orbit(capsys):
    code, (out,) = run(capsys, "orbit", "--system", "S1", "--eps", "1", "--start", "1/3,1/5", "--n", "10")
    assert out["mode"] == "exact" and out["detected_period"] == 4


def test_portrait(capsys, tmp_path):
    path = tmp_path / "p.csv"
    code, (out,) = run(capsys, "portrait", "--system", "S1", "--eps", "0.3", "--seeds", "3", "--iters", "10",
                       "--format", "csv", "--out", str(path))
    assert code == 0 and path.read_text().startswith("seed,iter,x,y")


def test_catalog_listing_and_custom_catalog(capsys, tmp_path):
    code, (out,) = run(capsys, "catalog")
    assert "S2star" in {s["name"] for s in out["systems"]}
    p = tmp_path / "c.json"
    p.write_text("[]")
    code, (out,) = run(capsys, "--catalog", str(p), "catalog")
    assert out["systems"] == []


def test_unknown_system(capsys):
    code, (out,) = run(capsys, "classify", "--system", "nosuch", "--eps", "1", "--h", "1")
    assert code == 1 and "error" in out


def test_deterministic(capsys):
    args = ("verify", "--system", "S4", "--eps", "1/2", "--pseudo", "--checks", "integral")
    assert run(capsys, *args) == run(capsys, *args)
