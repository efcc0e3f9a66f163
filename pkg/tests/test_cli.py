import csv
import json
import math

import numpy as np
import pytest

from dumbbell_nls import make_grid
from dumbbell_nls.cli import (DataError, dumps_solution, interpolate_onto, load_config, main,
                              read_solution, worker_count)
from dumbbell_nls.solve import gaussian_seed, hybrid

HALF_PI = "1.5707963267948966"
TWO_PI = "6.283185307179586"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_command(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "--L", HALF_PI, "--count", "3")
    assert code == 0
    data = json.loads(out)
    assert float(data["odd_roots"][0]) < 0.5 < float(data["even_roots"][0])
    assert data["orderings_hold"]
    path = tmp_path / "roots.json"
    assert run(capsys, "spectrum", "--L", TWO_PI, "--out", str(path))[0] == 0
    assert json.loads(path.read_text())["resonance"] == {"m": 4, "n": 1, "kind": "even"}
    assert run(capsys, "spectrum", "--L", HALF_PI, "--count", "0")[0] == 64


def test_solve_tags_and_round_trip(capsys, tmp_path):
    path = tmp_path / "sym.json"
    code, out, _ = run(capsys, "solve", "--L", HALF_PI, "--lambda", "-10", "--init", "segment-gauss",
                       "--N", "64", "--out", str(path))
    assert code == 0 and "tag=symmetric" in out
    grid, lam, phi, data = read_solution(path)
    assert lam == -10.0 and data["tag"] == "symmetric"
    assert len(data["values"]["ring_minus"]) == grid.N + 1
    assert data["values"]["ring_minus"][0] == data["values"]["segment"][0]
    # re-serialization is bit-identical
    from dumbbell_nls.solve import make_state
    again = make_state(phi, lam, spectra=False)
    assert dumps_solution(again) == path.read_text()
    assert again.residual_norm < 1e-8

    code, out, _ = run(capsys, "solve", "--L", HALF_PI, "--lambda", "-0.01", "--init", "segment-gauss",
                       "--N", "64")
    assert code == 0 and "tag=constant" in out


def test_solve_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "solve", "--L", HALF_PI, "--lambda", "-4", "--init", "ring-gauss",
                   "--N", "32", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_from_file_on_finer_mesh(capsys, tmp_path):
    coarse = tmp_path / "coarse.json"
    run(capsys, "solve", "--L", HALF_PI, "--lambda", "-4", "--init", "ring-gauss", "--N", "32",
        "--out", str(coarse))
    code, out, _ = run(capsys, "solve", "--L", HALF_PI, "--lambda", "-4", "--init", f"file:{coarse}",
                       "--N", "64", "--method", "newton")
    assert code == 0 and "tag=asymmetric" in out


def test_solve_errors(capsys, tmp_path):
    assert run(capsys, "solve", "--L", HALF_PI, "--lambda", "-1", "--init", "file:missing.json")[0] == 66
    code, _, err = run(capsys, "solve", "--L", "1.0", "--lambda", "-1")
    assert code == 64 and "rational multiple" in err
    code, _, err = run(capsys, "solve", "--L", "1.0471975511965976", "--lambda", "-1", "--N", "32")
    assert code == 64 and "--N 33" in err
    assert run(capsys, "solve", "--L", HALF_PI, "--lambda", "2")[0] == 64
    out = tmp_path / "fail.json"
    code = main(["solve", "--L", HALF_PI, "--lambda", "-10", "--method", "petviashvili",
                 "--max-iter", "2", "--N", "32", "--out", str(out)])
    assert code == 3
    assert json.loads((tmp_path / "fail.json.failed").read_text())["tag"] == "failed"


def test_branch_command(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# coarse run\nN = 32\nsteps = 6\n")
    monkeypatch.setenv("DUMBBELL_NLS_THREADS", "2")
    out = tmp_path / "br.csv"
    code = main(["--config", str(cfg), "branch", "--L", TWO_PI, "--family", "constant,symmetric",
                 "--lambda-start", "-4", "--lambda-end", "-6", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "br_constant.csv").open()))
    assert len(rows) == 7 and list(rows[0]) == ["lambda", "Q", "E", "lplus_eig2"]
    for r in rows:
        assert float(r["Q"]) == pytest.approx(4 * math.pi * abs(float(r["lambda"])), rel=1e-8)
    sym = list(csv.DictReader((tmp_path / "br_symmetric.csv").open()))
    assert all(float(r["lplus_eig2"]) > 0 for r in sym)
    meta = json.loads((tmp_path / "br_symmetric.csv.meta.json").read_text())
    assert meta["N"] == 32 and meta["rows"] == 7 and "created" in meta


def test_branch_truncation_exit_code(capsys):
    code, out, err = run(capsys, "branch", "--L", HALF_PI, "--family", "asymmetric", "--lambda-start", "-0.3",
                         "--lambda-end", "-0.01", "--steps", "5", "--N", "32")
    assert code == 3 and "ended at lambda" in err
    assert out.startswith("lambda,Q,E,lplus_eig2")


def test_branch_usage_errors(capsys):
    assert run(capsys, "branch", "--L", HALF_PI, "--family", "bogus", "--lambda-start", "-1",
               "--lambda-end", "-2")[0] == 64
    assert run(capsys, "branch", "--L", HALF_PI, "--family", "constant", "--lambda-start", "-1",
               "--lambda-end", "-2", "--steps", "0")[0] == 64


def test_compare_command(capsys, tmp_path):
    path = tmp_path / "sym.json"
    run(capsys, "solve", "--L", HALF_PI, "--lambda", "-10", "--N", "64", "--out", str(path))
    code, out, _ = run(capsys, "compare", "--solution", str(path), "--profile", "sech-segment")
    assert code == 0
    sup = float(out.split("sup_distance=")[1].split()[0])
    assert sup < 0.05 * math.sqrt(10)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "compare", "--solution", str(bad), "--profile", "dnoidal")[0] == 65
    assert run(capsys, "compare", "--solution", str(tmp_path / "none.json"), "--profile", "dnoidal")[0] == 66


def test_compare_ring_state_against_dnoidal(capsys, tmp_path):
    path = tmp_path / "asym.json"
    run(capsys, "solve", "--L", HALF_PI, "--lambda", "-4", "--init", "ring-gauss", "--N", "128", "--out", str(path))
    code, out, _ = run(capsys, "compare", "--solution", str(path), "--profile", "dnoidal")
    h = 2 * math.pi / 128
    assert code == 0 and float(out.split("sup_distance=")[1].split()[0]) < 5 * h * h


def test_normalform_command(capsys):
    code, out, _ = run(capsys, "normalform", "--L", HALF_PI)
    assert code == 0
    fields = {line.split()[0]: (float(line.split()[2]), line.split()[3]) for line in out.splitlines()}
    for key in ("Omega_coef", "slope_I", "slope_II", "slope_III", "Lambda0"):
        assert fields[key][1] == "negative"
    assert fields["eig_coef"][1] == "positive"
    w = fields["Omega1"][0]
    assert fields["Q0_star"][0] == pytest.approx(0.5 * (math.pi / 2 + 2 * math.pi) * w * w, rel=1e-15)
    assert run(capsys, "normalform", "--L", "-1")[0] == 64


def test_elliptic_check_command(capsys):
    code, out, _ = run(capsys, "elliptic-check")
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 7


def test_config_and_threads(tmp_path, monkeypatch):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("N=64\ntol=1e-13\n")
    assert load_config(cfg) == {"N": 64, "tol": 1e-13}
    cfg.write_text("colour = blue\n")
    with pytest.raises(DataError):
        load_config(cfg)
    monkeypatch.setenv("DUMBBELL_NLS_THREADS", "1")
    assert worker_count(3) == 1
    assert main(["--config", str(tmp_path / "nope.cfg"), "elliptic-check"]) == 66


def test_interpolation_keeps_junction_copies():
    coarse = make_grid(math.pi / 2, 32)
    st = hybrid(gaussian_seed(coarse, -4.0, "ring"), -4.0, spectra=False)
    fine = interpolate_onto(st.phi, make_grid(math.pi / 2, 64))
    assert fine.edge_values("ring_plus")[0] == fine.edge_values("segment")[-1]
    assert np.max(fine.values) == pytest.approx(np.max(st.phi.values), rel=1e-6)
