import csv
import json
import math

import pytest

from nxent import cli

LN_2PI = math.log(2 * math.pi)
VACUUM = {"kind": "fock", "n": 0, "N": 0}


def write_config(tmp_path, **spec):
    spec.setdefault("state", VACUUM)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(spec))
    return str(path)


def read_report(out):
    return json.loads((out / "report.json").read_text())


def test_check_vacuum(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, alphas=[2], out=str(out))
    assert cli.run(["check", "--config", cfg]) == 0
    rep = read_report(out)
    assert rep["all_pass"]
    renyi = [r for r in rep["reports"] if r["relation"] == "renyi"]
    assert renyi[0]["margin"] == pytest.approx(math.log(2), abs=1e-3)
    tsallis = [r for r in rep["reports"] if r["relation"] == "tsallis"]
    assert tsallis[0]["margin"] == pytest.approx(0.0796, abs=1e-3)
    assert {r["relation"] for r in rep["reports"]} >= {"riesz_w", "riesz_s", "tracing"}
    assert (out / "number_dist.csv").read_text().splitlines() == ["n,s", "0,1"]
    with open(out / "density.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["xi", "k", "w"]


def test_state_file_relative_to_config(tmp_path):
    (tmp_path / "st.json").write_text(json.dumps({"kind": "coherent", "alpha": [0.5, 0.0], "N": 12}))
    cfg = write_config(tmp_path, state="st.json", alphas=[1.5], n0=1)
    assert cli.run(["check", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out = tmp_path / "out"
    assert cli.run(["check", "--config", str(bad), "--out", str(out)]) == 2
    assert "malformed" in capsys.readouterr().err
    assert not out.exists()


def test_alpha_outside_domain_exits_2(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, alphas=[0.4], out=str(out))
    assert cli.run(["check", "--config", cfg]) == 2
    assert "1/2" in capsys.readouterr().err
    assert not out.exists()


def test_missing_state_file_exits_2(tmp_path):
    cfg = write_config(tmp_path, state="nowhere.json")
    assert cli.run(["check", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_scan_alpha(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, alpha_range={"start": 1.5, "stop": 5, "num": 8}, out=str(out))
    assert cli.run(["scan-alpha", "--config", cfg]) == 0
    with open(out / "scan.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["alpha", "beta", "renyi_lhs", "renyi_bound", "tsallis_lhs",
                             "tsallis_bound", "margin_r", "margin_t"]
    alphas = [float(r["alpha"]) for r in rows]
    assert alphas[0] == 1.0 and len(alphas) == 9
    assert len({r["renyi_bound"] for r in rows}) == 1
    assert float(rows[0]["renyi_bound"]) == pytest.approx(LN_2PI, abs=1e-15)
    margins = [float(r["margin_r"]) for r in rows]
    assert all(m > 0 for m in margins)
    assert all(b < a for a, b in zip(margins, margins[1:]))
    for a, m in zip(alphas[1:], margins[1:]):
        assert m == pytest.approx(math.log(a) / (a - 1), abs=1e-6)
    assert margins[0] == pytest.approx(1.0, abs=1e-6)
    assert all(float(r["margin_t"]) > 0 for r in rows)


def test_scan_needs_two_points(tmp_path):
    cfg = write_config(tmp_path, alphas=[2.0])
    assert cli.run(["scan-alpha", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_bins_vacuum(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, alphas=[2], out=str(out),
                       partition={"uniform": {"dxi": 0.5, "dk": 0.5, "extent": 8}})
    assert cli.run(["bins", "--config", cfg]) == 0
    rep = read_report(out)
    assert not rep["trivial"]
    ren = [r for r in rep["reports"] if r["relation"] == "renyi_binned"]
    assert ren and all(r["bound"] == pytest.approx(math.log(8 * math.pi)) for r in ren)
    lines = (out / "bins.csv").read_text().splitlines()
    assert lines[0] == "xi_lo,xi_hi,k_lo,k_hi,r" and len(lines) == 1 + 32 * 32


def test_bins_trivial_flag(tmp_path):
    out = tmp_path / "out"
    h = 2 * math.sqrt(math.pi)
    edges = [-2 * h, -h, 0, h, 2 * h]
    cfg = write_config(tmp_path, alphas=[2], out=str(out), grid={"extent": 9, "points": 256},
                       partition={"xi_edges": edges, "k_edges": edges})
    assert cli.run(["bins", "--config", cfg]) == 0
    rep = read_report(out)
    assert rep["trivial"] and all(r["params"]["trivial"] for r in rep["reports"])


def test_bins_partition_outside_grid(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, out=str(out), grid={"extent": 8, "points": 128},
                       partition={"uniform": {"dxi": 1, "dk": 1, "extent": 12}})
    assert cli.run(["bins", "--config", cfg]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_eta_command(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.run(["eta", "--n0", "0", "--nmax", "3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "eta = 0.3989422" in text and "(2 pi)^(-1/2)" in text
    payload = json.loads((out / "eta.json").read_text())
    assert payload["eta"] == pytest.approx((2 * math.pi) ** -0.5, abs=1e-6)
    assert (payload["n"], payload["nmax"]) == (0, 3)


def test_minimize_command(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, out=str(out), seed=3,
                       minimize={"alpha": 2, "N": 2, "starts": 1, "max_evals": 150, "search_points": 80})
    del_state = json.loads(open(cfg).read())
    del del_state["state"]
    open(cfg, "w").write(json.dumps(del_state))
    assert cli.run(["minimize", "--config", cfg]) == 0
    best = json.loads((out / "best_state.json").read_text())
    assert best["kind"] == "superposition"
    assert read_report(out)["reports"][0]["margin"] >= -1e-5


def test_reports_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, state={"kind": "coherent", "alpha": [0.3, 0.2], "N": 10},
                       alphas=[1.5, 3], n0=1, grid={"extent": 16, "points": 200})
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert cli.run(["check", "--config", cfg, "--out", str(o)]) == 0
    for name in ("report.json", "density.csv", "number_dist.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("NXENT_THREADS", "many")
    cfg = write_config(tmp_path)
    assert cli.run(["check", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    monkeypatch.setenv("NXENT_THREADS", "1")
    assert cli.run(["check", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
