import json
import subprocess
import sys

import numpy as np
import pytest

from gammagh.cli import main
from gammagh.rng import make_stream


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_charfn_origin(capsys):
    assert run(capsys, "eval", "charfn", "--u", "0") == (0, "1 0\n", "")


def test_eval_charfn_value(capsys):
    code, out, _ = run(capsys, "eval", "charfn", "--u", "1", "--mu", "0", "--sigma", "1.4142135623730951")
    re, im = map(float, out.split())
    assert code == 0 and re == pytest.approx(0.5, rel=1e-14) and abs(im) < 1e-15


def test_eval_constant(capsys):
    code, out, _ = run(capsys, "eval", "constant")
    vals = dict(line.split() for line in out.splitlines())
    assert code == 0
    assert float(vals["I1"]) == pytest.approx(0.278806, abs=1e-6)
    assert float(vals["I2"]) == pytest.approx(0.219384, abs=1e-6)
    assert float(vals["E1"]) == pytest.approx(1.014565, abs=1e-6)
    assert float(vals["E2"]) == pytest.approx(6.194436, abs=1e-6)
    assert float(vals["C"]) == pytest.approx(2.0, rel=1e-10)  # Γ(1) (b/2)^(-1) at b = 1


def test_eval_pdf_singular(capsys):
    code, out, err = run(capsys, "eval", "pdf", "--a", "0.5", "--u", "1")
    assert code == 0
    assert out == "inf\n"
    assert "singular" in err


def test_eval_pdf_dists(capsys):
    code, out, _ = run(capsys, "eval", "pdf", "--dist", "ig", "--a", "0.5", "--b", "0.5", "--mu", "0",
                       "--sigma", "1", "--u", "0")
    assert code == 0 and float(out) == pytest.approx(1 / np.pi, rel=1e-12)
    code, out, _ = run(capsys, "eval", "pdf", "--dist", "gig", "--a", "1", "--b", "2", "--c", "1", "--mu", "0",
                       "--sigma", "1", "--u", "0.4")
    assert code == 0 and float(out) == pytest.approx(0.346952065928909518, rel=1e-9)


def test_simulate_csv(capsys):
    code, out, err = run(capsys, "simulate", "--a", "0.5")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "t,value" and lines[1] == "0,0"
    assert len(lines) == 502
    assert "terminal" in err


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(capsys, "simulate", "--out", str(b), "--seed", "43")[0] == 0
    assert a.read_bytes() != b.read_bytes()


def test_simulate_variants(capsys):
    _, bm, _ = run(capsys, "simulate", "--brownian", "--n", "100")
    assert len(bm.splitlines()) == 102
    _, raw, _ = run(capsys, "simulate", "--n", "10")
    _, cen, _ = run(capsys, "simulate", "--n", "10", "--centered")
    last_raw = float(raw.splitlines()[-1].split(",")[1])
    last_cen = float(cen.splitlines()[-1].split(",")[1])
    assert last_cen == pytest.approx(last_raw - 1.0, abs=1e-12)
    _, js, _ = run(capsys, "simulate", "--n", "10", "--format", "json")
    assert len(json.loads(js)["value"]) == 11


def test_figures(tmp_path, capsys):
    code, out, _ = run(capsys, "figures", "--out", str(tmp_path))
    names = sorted(p.name for p in tmp_path.iterdir())
    assert code == 0
    assert names == ["fig_a0p5.csv", "fig_a1.csv", "fig_a10.csv", "fig_a3.csv", "fig_brownian.csv"]
    for p in tmp_path.iterdir():
        lines = p.read_text().splitlines()
        assert len(lines) == 502 and lines[1] == "0,0"


def test_figures_paired_share_normals(tmp_path, capsys):
    assert run(capsys, "figures", "--out", str(tmp_path), "--paired", "--n", "200", "--mu", "0")[0] == 0
    z = make_stream(42, 0).standard_normal(200)
    for name in ("fig_a0p5.csv", "fig_a1.csv", "fig_a3.csv", "fig_a10.csv"):
        vals = np.loadtxt(tmp_path / name, delimiter=",", skiprows=1)[:, 1]
        inc = np.diff(vals)
        nz = inc != 0
        assert np.array_equal(np.sign(inc[nz]), np.sign(z[nz]))


def test_experiment_variation_json(capsys):
    code, out, _ = run(capsys, "experiment", "variation", "--reps", "500", "--cells", "256")
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["experiment"] == "variation"


def test_experiment_qv_csv(capsys):
    code, out, _ = run(capsys, "experiment", "qv", "--reps", "300", "--cells", "64,1024", "--format", "csv")
    assert code == 0
    assert len(out.splitlines()) == 3


def test_experiment_other_kinds(capsys):
    assert run(capsys, "experiment", "charfn", "--n", "20000")[0] == 0
    assert run(capsys, "experiment", "idecomp", "--n", "20000", "--parts", "3")[0] == 0
    assert run(capsys, "experiment", "fdd", "--n", "50", "--reps", "20000")[0] == 0


def test_exit_code_failed_check(capsys):
    # two nearly equal meshes: the Brownian variance cannot collapse by 10x
    code, out, _ = run(capsys, "experiment", "qv", "--reps", "300", "--cells", "256,257")
    assert code == 3
    assert json.loads(out)["passed"] is False


def test_exit_code_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 2
    assert run(capsys, "simulate", "--sigma", "-1")[0] == 2
    assert run(capsys, "simulate", "--n", "0")[0] == 2
    assert run(capsys, "experiment", "charfn", "--format", "csv", "--n", "1000")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "qv", "--cells", "a,b"])
    assert exc.value.code == 2


def test_exit_code_io(tmp_path, capsys):
    assert run(capsys, "simulate", "--out", str(tmp_path / "missing" / "x.csv"))[0] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gammagh", "eval", "charfn", "--u", "0"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == "1 0\n"

