import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastodg import (CSV_HEADER, ExperimentConfig, fit_slope, resolve_rule,
                      run_compare, run_convergence, run_pollution, run_single,
                      run_stability)
from elastodg.cli import config_from_args, build_parser, main, parse_omegas


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("rule,omega,expect", [
    ("wh=1", 10.0, 10), ("wh=0.5", 10.0, 20), ("wh=0.5", 20.0, 40),
    ("wh=0.5", 40.0, 80), ("w3h2=1", 10.0, 32), ("w3h2=1", 20.0, 90),
    ("w3h2=1", 40.0, 253), ("wh=2", 7.0, 4),
])
def test_rule_arithmetic(rule, omega, expect):
    assert resolve_rule(rule, omega) == expect


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 300.0), st.floats(0.1, 4.0))
def test_rule_resolution_properties(omega, c):
    n = resolve_rule(f"wh={c}", omega)
    assert n >= 1
    # n is the smallest integer with omega * (1/n) <= c (up to slack)
    assert omega / n <= c * (1 + 1e-9)
    if n > 1:
        assert omega / (n - 1) > c * (1 - 1e-9)


def test_rule_rejects_garbage():
    with pytest.raises(ValueError):
        resolve_rule("wh", 10.0)
    with pytest.raises(ValueError):
        resolve_rule("wh=abc", 10.0)
    with pytest.raises(ValueError):
        resolve_rule("wh=-1", 10.0)
    with pytest.raises(ValueError):
        resolve_rule("cube=1", 10.0)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(study="mystery")
    with pytest.raises(ValueError):
        ExperimentConfig(study="single", methods=("spectral",))
    with pytest.raises(ValueError):
        ExperimentConfig(study="single", omegas=(-1.0,))
    with pytest.raises(ValueError):
        ExperimentConfig(study="single", ns=(0,))


def test_fit_slope_recovers_powers():
    hs = [1 / 4, 1 / 8, 1 / 16]
    assert fit_slope(hs, [h**2 for h in hs]) == pytest.approx(2.0, abs=1e-12)
    assert fit_slope(hs, [3 * h for h in hs]) == pytest.approx(1.0, abs=1e-12)


def test_csv_schema_and_order(tmp_path):
    cfg = ExperimentConfig(study="convergence", omegas=(4.0,), ns=(8, 4, 6),
                           methods=("dg",), out=str(tmp_path / "c.csv"))
    records, slopes = run_convergence(cfg)
    rows = read_rows(cfg.out)
    assert rows[0] == CSV_HEADER.split(",")
    assert len(rows) == 1 + 3
    ns = [int(r[3]) for r in rows[1:]]
    assert ns == sorted(ns)               # sorted by (study, method, omega, n)
    for r in rows[1:]:
        assert all(math.isfinite(float(x)) for x in r[2:])
    assert ("dg", 4.0) in slopes


def test_convergence_needs_three_meshes(tmp_path):
    cfg = ExperimentConfig(study="convergence", omegas=(4.0,), ns=(8, 16),
                           out=str(tmp_path / "c.csv"))
    with pytest.raises(ValueError, match="insufficient mesh sizes"):
        run_convergence(cfg)


def test_csv_reproducible(tmp_path):
    # identical configs give identical files apart from the wall-time
    # columns, which are physically non-reproducible
    outs = []
    for tag in ("a", "b"):
        cfg = ExperimentConfig(study="stability", omegas=(2.0, 3.0), ns=(4,),
                               methods=("dg", "fem"),
                               out=str(tmp_path / f"{tag}.csv"))
        run_stability(cfg)
        outs.append(read_rows(cfg.out))
    drop = (CSV_HEADER.split(",").index("assemble_ms"),
            CSV_HEADER.split(",").index("solve_ms"))
    for ra, rb in zip(*outs):
        assert [x for i, x in enumerate(ra) if i not in drop] == \
            [x for i, x in enumerate(rb) if i not in drop]


def test_stability_reports_smoothness(tmp_path):
    cfg = ExperimentConfig(study="stability", omegas=(1.0, 2.0, 3.0, 4.0),
                           ns=(6,), methods=("dg", "fem"),
                           out=str(tmp_path / "s.csv"))
    records, smooth = run_stability(cfg)
    assert len(records) == 8
    assert all(np.isfinite(r.norm_1h) and r.norm_1h > 0 for r in records)
    assert set(smooth) == {("dg", 6), ("fem", 6)}
    assert all(v >= 0 for v in smooth.values())


def test_pollution_rows_follow_rules(tmp_path):
    cfg = ExperimentConfig(study="pollution", omegas=(4.0, 8.0),
                           rules=("wh=1", "wh=0.5"), methods=("dg",),
                           out=str(tmp_path / "p.csv"))
    records = run_pollution(cfg)
    got = {(r.omega, r.n) for r in records}
    assert got == {(4.0, 4), (4.0, 8), (8.0, 8), (8.0, 16)}
    assert all(r.c_sta > 0 for r in records)


def test_compare_cross_section(tmp_path):
    cfg = ExperimentConfig(study="compare", omegas=(5.0,), ns=(8, 16),
                           methods=("dg", "fem"), out=str(tmp_path / "x.csv"))
    records, xsec = run_compare(cfg)
    assert len(records) == 4
    assert xsec.name == "x_xsec.csv"
    rows = read_rows(xsec)
    assert rows[0] == ["s", "x", "y", "exact", "dg_8", "dg_16",
                       "fem_8", "fem_16"]
    assert len(rows) == 1 + 1000
    mid = rows[1 + 500]                   # s = 0 lives at k = 500
    assert float(mid[0]) == 0.0
    assert float(mid[3]) == 0.0           # Re u(0) = Re(i/w, -i/w) = 0
    tab = np.array([[float(x) for x in r] for r in rows[1:]])
    assert np.isfinite(tab).all()
    # finer DG mesh tracks the analytic curve more closely
    dg8 = np.abs(tab[:, 4] - tab[:, 3]).max()
    dg16 = np.abs(tab[:, 5] - tab[:, 3]).max()
    assert dg16 < dg8


def test_single_with_centroid_dump(tmp_path):
    cfg = ExperimentConfig(study="single", omegas=(5.0,), ns=(6,),
                           methods=("dg",), out=str(tmp_path / "one.csv"),
                           dump=str(tmp_path / "field.csv"))
    rec, norms, report = run_single(cfg)
    assert rec.residual <= 1e-10
    assert norms.norm_1h > 0
    rows = read_rows(cfg.dump)
    assert rows[0] == ["x", "y", "re_u1", "im_u1", "re_u2", "im_u2"]
    assert len(rows) == 1 + 2 * 6 * 6
    xs = [float(r[0]) for r in rows[1:]]
    assert min(xs) > -0.5 and max(xs) < 0.5


def test_threaded_run_matches_serial(tmp_path, monkeypatch):
    serial = ExperimentConfig(study="convergence", omegas=(3.0,), ns=(4, 6, 8),
                              out=str(tmp_path / "serial.csv"))
    run_convergence(serial)
    monkeypatch.setenv("ELASTODG_THREADS", "2")
    threaded = ExperimentConfig(study="convergence", omegas=(3.0,),
                                ns=(4, 6, 8), out=str(tmp_path / "thr.csv"))
    run_convergence(threaded)
    a, b = read_rows(serial.out), read_rows(threaded.out)
    num = [CSV_HEADER.split(",").index(c) for c in
           ("rel_err_h1semi", "rel_err_l2", "norm_1h", "j0", "j1")]
    for ra, rb in zip(a[1:], b[1:]):
        for i in num:
            assert float(ra[i]) == pytest.approx(float(rb[i]), abs=1e-12)


def test_parse_omegas_ranges():
    assert parse_omegas(["1:5"]) == (1.0, 2.0, 3.0, 4.0, 5.0)
    assert parse_omegas(["2", "4:6"]) == (2.0, 4.0, 5.0, 6.0)
    assert parse_omegas(["1:2:0.5"]) == (1.0, 1.5, 2.0)
    with pytest.raises(ValueError):
        parse_omegas(["5:1"])
    with pytest.raises(ValueError):
        parse_omegas(["1:2:0"])


def test_cli_defaults_mirror_studies():
    args = build_parser().parse_args(["pollution"])
    cfg = config_from_args(args)
    assert cfg.rules == ("wh=1", "wh=0.5", "w3h2=1")
    assert cfg.omegas == (10.0, 20.0, 40.0)
    args = build_parser().parse_args(["stability"])
    cfg = config_from_args(args)
    assert cfg.omegas[0] == 1.0 and cfg.omegas[-1] == 200.0
    assert len(cfg.omegas) == 200
    assert cfg.ns == (20, 100)            # h = 0.05, 0.01
    assert cfg.methods == ("dg", "fem")
    args = build_parser().parse_args(["stability", "--h", "0.25", "0.125"])
    assert config_from_args(args).ns == (4, 8)
    args = build_parser().parse_args(["compare"])
    cfg = config_from_args(args)
    assert cfg.omegas == (100.0,) and cfg.ns == (50, 120, 200)


def test_cli_runs_and_rejects(tmp_path, capsys):
    rc = main(["single", "--omega", "4", "--n", "5",
               "--out", str(tmp_path / "s.csv")])
    assert rc == 0
    assert (tmp_path / "s.csv").exists()
    out = capsys.readouterr().out
    assert "residual" in out
    with pytest.raises(SystemExit) as exc:
        main(["single", "--method", "spectral"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["mystery"])


def test_cli_svg_written(tmp_path):
    rc = main(["convergence", "--omega", "4", "--n", "4", "6", "8",
               "--out", str(tmp_path / "c.csv"), "--svg"])
    assert rc == 0
    svg = tmp_path / "c.svg"
    assert svg.exists()
    assert svg.read_text()[:100].lstrip().startswith("<?xml")


def test_compare_at_paper_scale(tmp_path):
    # omega=100 on the finest study mesh: both discretizations resolve
    # the wave and land within a factor 3 of each other in relative L2
    cfg = ExperimentConfig(study="compare", omegas=(100.0,), ns=(200,),
                           methods=("dg", "fem"), solver="direct",
                           out=str(tmp_path / "cmp200.csv"))
    records, _ = run_compare(cfg)
    by = {r.method: r for r in records}
    for rec in by.values():
        assert np.isfinite(rec.rel_err_l2) and np.isfinite(rec.rel_err_h1semi)
        assert rec.residual <= cfg.tol
    ratio = by["fem"].rel_err_l2 / by["dg"].rel_err_l2
    assert 1.0 / 3.0 <= ratio <= 3.0
