"""Experiment harness: stability sweeps, convergence tables, pollution
studies, DG-vs-FEM cross-sections, and single-solve diagnostics.

All studies share one flat CSV schema (CSV_HEADER below) so downstream
plotting never branches per study.  Records are computed per (method,
omega, n) point, gathered, and sorted before writing, so file content is
deterministic for a fixed configuration; the two wall-time columns are
the only fields that vary between identical runs.

Mesh-size rules for the pollution study ("wh=c", "w3h2=c") resolve to
n = ceil(omega / c) and n = ceil(omega^{3/2} / sqrt(c)); a tiny slack
keeps exact integer targets (omega=10 under wh=1 -> n=10) from rounding
up through floating-point noise.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .assembly import assemble_dg, assemble_fem
from .exact import exact_u
from .mesh import Mesh, build_uniform
from .norms import (NormReport, error_vs_exact, exact_norms, norms_of,
                    relative_errors)
from .params import ProblemParams
from .solver import solve
from .spaces import DgField, DgSpace, FemSpace, all_element_coeffs, fem_to_dg

CSV_HEADER = ("study,method,omega,n,h,dofs,rel_err_h1semi,rel_err_l2,"
              "norm_1h,j0,j1,c_sta,residual,assemble_ms,solve_ms")
STUDIES = ("stability", "convergence", "pollution", "compare", "single")
METHODS = ("dg", "fem")
XSEC_POINTS = 1000
RULE_SLACK = 1e-12


def resolve_rule(rule: str, omega: float) -> int:
    """Map a mesh-size rule to n for a given omega.

    "wh=c"   : omega * h = c      -> n = ceil(omega / c)
    "w3h2=c" : omega^3 * h^2 = c  -> n = ceil(omega^{3/2} / sqrt(c))
    """
    name, sep, value = rule.partition("=")
    if not sep:
        raise ValueError(f"rule {rule!r} is not of the form name=value")
    try:
        c = float(value)
    except ValueError as exc:
        raise ValueError(f"rule {rule!r} has a non-numeric value") from exc
    if c <= 0:
        raise ValueError(f"rule {rule!r} needs a positive value")
    if name == "wh":
        target = omega / c
    elif name == "w3h2":
        target = omega**1.5 / math.sqrt(c)
    else:
        raise ValueError(f"unknown rule name {name!r} (use wh or w3h2)")
    n = int(math.ceil(target - RULE_SLACK))
    return max(n, 1)


@dataclass(frozen=True)
class ExperimentConfig:
    study: str
    omegas: tuple = ()
    ns: tuple = ()
    rules: tuple = ()
    methods: tuple = ("dg",)
    rho: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    gamma0: float = 10.0
    gamma1: float = 0.1
    quad: int = 10
    tol: float = 1e-10
    solver: str = "auto"
    out: str = "results.csv"
    svg: bool = False
    dump: Optional[str] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if any(w <= 0 for w in self.omegas):
            raise ValueError("all omega values must be positive")
        if any(n < 1 for n in self.ns):
            raise ValueError("all mesh sizes must satisfy n >= 1")

    def params(self, omega: float) -> ProblemParams:
        return ProblemParams(omega=float(omega), rho=self.rho, lam=self.lam,
                             mu=self.mu, gamma0=self.gamma0, gamma1=self.gamma1)


@dataclass(frozen=True)
class ExperimentRecord:
    study: str
    method: str
    omega: float
    n: int
    h: float
    dofs: int
    rel_err_h1semi: float
    rel_err_l2: float
    norm_1h: float
    j0: float
    j1: float
    c_sta: float
    residual: float
    assemble_ms: float
    solve_ms: float

    def row(self) -> list:
        return [self.study, self.method, f"{self.omega:.12g}", str(self.n),
                f"{self.h:.12g}", str(self.dofs)] + \
            [f"{v:.12g}" for v in (self.rel_err_h1semi, self.rel_err_l2,
                                   self.norm_1h, self.j0, self.j1, self.c_sta,
                                   self.residual, self.assemble_ms,
                                   self.solve_ms)]


class _Cache:
    """Per-run mesh and exact-norm cache (heavyweight at large n)."""

    def __init__(self) -> None:
        self.meshes: dict[int, Mesh] = {}
        self.refs: dict[tuple, NormReport] = {}

    def mesh(self, n: int) -> Mesh:
        if n not in self.meshes:
            if len(self.meshes) > 2:
                self.meshes.clear()
            self.meshes[n] = build_uniform(n)
        return self.meshes[n]

    def reference(self, cfg: ExperimentConfig, omega: float, n: int) -> NormReport:
        key = (omega, n, cfg.quad, cfg.rho, cfg.lam, cfg.mu, cfg.gamma0)
        if key not in self.refs:
            if len(self.refs) > 8:
                self.refs.clear()
            self.refs[key] = exact_norms(self.mesh(n), cfg.params(omega),
                                         cfg.quad)
        return self.refs[key]


def _solve_point(cfg: ExperimentConfig, cache: _Cache, method: str,
                 omega: float, n: int):
    """One assembled-and-solved study point; returns (record, field, report)."""
    p = cfg.params(omega)
    mesh = cache.mesh(n)
    t0 = time.perf_counter()
    if method == "dg":
        space = DgSpace(mesh)
        system = assemble_dg(mesh, space, p, quad_rhs_degree=cfg.quad)
    else:
        space = FemSpace(mesh)
        system = assemble_fem(mesh, space, p, quad_rhs_degree=cfg.quad)
    assemble_ms = 1e3 * (time.perf_counter() - t0)

    report = solve(system, tol=cfg.tol, method=cfg.solver)
    raw = DgField(space, report.solution)
    fld = fem_to_dg(raw) if method == "fem" else raw

    own = norms_of(fld, p)
    err = error_vs_exact(fld, p, cfg.quad)
    ref = cache.reference(cfg, omega, n)
    rel_h1, rel_l2 = relative_errors(err, ref)
    rec = ExperimentRecord(
        study=cfg.study, method=method, omega=float(omega), n=n, h=1.0 / n,
        dofs=space.ndofs, rel_err_h1semi=rel_h1, rel_err_l2=rel_l2,
        norm_1h=own.norm_1h, j0=own.j0, j1=own.j1, c_sta=p.c_sta(1.0 / n),
        residual=report.residual, assemble_ms=assemble_ms,
        solve_ms=1e3 * report.wall_seconds)
    return rec, fld, report


def _worker_count() -> int:
    raw = os.environ.get("ELASTODG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_points(cfg: ExperimentConfig, cache: _Cache, points):
    """Solve every (method, omega, n) point, optionally on worker threads."""
    workers = _worker_count()
    if workers == 1:
        return [_solve_point(cfg, cache, *pt) for pt in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_solve_point, cfg, cache, *pt) for pt in points]
        return [f.result() for f in futures]


def _sorted_records(results) -> list:
    recs = [r for r, _, _ in results]
    recs.sort(key=lambda r: (r.study, r.method, r.omega, r.n))
    return recs


def write_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for rec in records:
            writer.writerow(rec.row())


def run_stability(cfg: ExperimentConfig):
    """Norm sweep over omega at fixed mesh sizes, both discretizations.

    Returns (records, smoothness) where smoothness maps (method, n) to
    the largest relative step of ||u_h||_{1,h} between adjacent omegas
    (reported as a diagnostic, never asserted)."""
    cache = _Cache()
    points = [(m, w, n) for m in cfg.methods for n in cfg.ns
              for w in cfg.omegas]
    records = _sorted_records(_run_points(cfg, cache, points))
    smoothness = {}
    for m in cfg.methods:
        for n in cfg.ns:
            series = [r.norm_1h for r in records
                      if r.method == m and r.n == n]
            steps = [abs(b - a) / a for a, b in zip(series, series[1:]) if a > 0]
            smoothness[(m, n)] = float(max(steps)) if steps else 0.0
    write_csv(records, cfg.out)
    if cfg.svg:
        _plot_stability(cfg, records)
    return records, smoothness


def fit_slope(hs, errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    xs, ys = np.log(np.asarray(hs, float)), np.log(np.asarray(errors, float))
    xs -= xs.mean()
    return float(np.dot(xs, ys - ys.mean()) / np.dot(xs, xs))


def run_convergence(cfg: ExperimentConfig):
    """Error-vs-h table per omega plus fitted (seminorm, L2) slopes."""
    if len(cfg.ns) < 3:
        raise ValueError("insufficient mesh sizes: need at least 3")
    cache = _Cache()
    points = [(m, w, n) for m in cfg.methods for w in cfg.omegas
              for n in sorted(cfg.ns)]
    records = _sorted_records(_run_points(cfg, cache, points))
    slopes = {}
    for m in cfg.methods:
        for w in cfg.omegas:
            sub = [r for r in records if r.method == m and r.omega == w]
            hs = [r.h for r in sub]
            slopes[(m, float(w))] = (fit_slope(hs, [r.rel_err_h1semi for r in sub]),
                                     fit_slope(hs, [r.rel_err_l2 for r in sub]))
    write_csv(records, cfg.out)
    if cfg.svg:
        _plot_convergence(cfg, records)
    return records, slopes


def run_pollution(cfg: ExperimentConfig):
    """Error along omega sequences with n tied to omega by each rule."""
    cache = _Cache()
    points = []
    for m in cfg.methods:
        for rule in cfg.rules:
            for w in cfg.omegas:
                pt = (m, w, resolve_rule(rule, w))
                if pt not in points:       # rules may collide on (omega, n)
                    points.append(pt)
    results = _run_points(cfg, cache, points)
    records = _sorted_records(results)
    write_csv(records, cfg.out)
    if cfg.svg:
        _plot_pollution(cfg, records)
    return records


def _xsec_positions() -> np.ndarray:
    """Sample parameters along y = x: s_k = -1/2 + k/m, k = 0..m-1.

    The grid contains s = 0 (m is even), where the analytic field is
    purely imaginary."""
    return -0.5 + np.arange(XSEC_POINTS) / XSEC_POINTS


def _xsec_magnitudes(fld: DgField, s: np.ndarray) -> np.ndarray:
    """|Re u(x)| sampled along the diagonal y = x.

    Every sample lies on the main diagonal of a diagonal cell, shared by
    that cell's two triangles; ties go to the lower-indexed element (the
    lower triangle; at cell corners, the touching element of the
    previous diagonal cell)."""
    mesh = fld.space.mesh
    n = mesh.n
    C = all_element_coeffs(fld)
    t = (s + 0.5) * n
    cell = np.minimum(t.astype(np.int64), n - 1)
    frac = t - cell
    corner = (frac == 0.0) & (cell >= 1)
    cell = np.where(corner, cell - 1, cell)
    frac = np.where(corner, 1.0, frac)
    elem = 2 * (cell * n + cell)           # lower triangle of cell (i, i)
    vals = (1.0 - frac)[:, None] * C[elem, 0] + frac[:, None] * C[elem, 2]
    return np.linalg.norm(np.real(vals), axis=1)


def run_compare(cfg: ExperimentConfig):
    """Cross-section study: error table plus |Re u| along y = x for every
    method and mesh, written to <out stem>_xsec.csv."""
    cache = _Cache()
    points = [(m, w, n) for m in cfg.methods for w in cfg.omegas
              for n in sorted(cfg.ns)]
    results = _run_points(cfg, cache, points)
    records = _sorted_records(results)
    write_csv(records, cfg.out)

    s = _xsec_positions()
    omega = cfg.omegas[0]
    p = cfg.params(omega)
    pts = np.stack([s, s], axis=1)
    exact_mag = np.linalg.norm(np.real(exact_u(pts, p)), axis=1)
    columns = {"s": s, "x": s, "y": s, "exact": exact_mag}
    for (rec, fld, _rep) in sorted(results, key=lambda t: (t[0].method, t[0].n)):
        columns[f"{rec.method}_{rec.n}"] = _xsec_magnitudes(fld, s)

    out = Path(cfg.out)
    xsec_path = out.with_name(out.stem + "_xsec.csv")
    with open(xsec_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(columns))
        for k in range(len(s)):
            writer.writerow([f"{columns[name][k]:.12g}" for name in columns])
    if cfg.svg:
        _plot_compare(cfg, columns)
    return records, xsec_path


def run_single(cfg: ExperimentConfig):
    """One diagnostic solve; optional centroid dump for external plotting."""
    cache = _Cache()
    method = cfg.methods[0]
    omega, n = cfg.omegas[0], cfg.ns[0]
    rec, fld, report = _solve_point(cfg, cache, method, omega, n)
    write_csv([rec], cfg.out)
    if cfg.dump:
        mesh = fld.space.mesh
        C = all_element_coeffs(fld)
        centroids = mesh.vertices[mesh.triangles].mean(axis=1)
        values = C.mean(axis=1)
        with open(cfg.dump, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "re_u1", "im_u1", "re_u2", "im_u2"])
            for (x, y), v in zip(centroids, values):
                writer.writerow([f"{x:.12g}", f"{y:.12g}",
                                 f"{v[0].real:.12g}", f"{v[0].imag:.12g}",
                                 f"{v[1].real:.12g}", f"{v[1].imag:.12g}"])
    norm_report = norms_of(fld, cfg.params(omega))
    return rec, norm_report, report


def _svg_path(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    return out.with_suffix(".svg")


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _plot_stability(cfg, records) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for m in cfg.methods:
        for n in cfg.ns:
            sub = [r for r in records if r.method == m and r.n == n]
            ax.plot([r.omega for r in sub], [r.norm_1h for r in sub],
                    label=f"{m}, h=1/{n}")
    ax.set_xlabel("omega")
    ax.set_ylabel("norm_1h of discrete solution")
    ax.legend()
    fig.savefig(_svg_path(cfg), format="svg", bbox_inches="tight")
    plt.close(fig)


def _plot_convergence(cfg, records) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for m in cfg.methods:
        for w in cfg.omegas:
            sub = [r for r in records if r.method == m and r.omega == w]
            ax.loglog([r.h for r in sub], [r.rel_err_h1semi for r in sub],
                      marker="o", label=f"{m}, omega={w:g}, H1")
            ax.loglog([r.h for r in sub], [r.rel_err_l2 for r in sub],
                      marker="s", linestyle="--", label=f"{m}, omega={w:g}, L2")
    ax.set_xlabel("h")
    ax.set_ylabel("relative error")
    ax.legend(fontsize=7)
    fig.savefig(_svg_path(cfg), format="svg", bbox_inches="tight")
    plt.close(fig)


def _plot_pollution(cfg, records) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for rule in cfg.rules:
        ws = sorted(set(cfg.omegas))
        ns = [resolve_rule(rule, w) for w in ws]
        errs = []
        for w, n in zip(ws, ns):
            match = [r for r in records if r.omega == w and r.n == n]
            errs.append(match[0].rel_err_h1semi if match else np.nan)
        ax.semilogy(ws, errs, marker="o", label=rule)
    ax.set_xlabel("omega")
    ax.set_ylabel("relative seminorm error")
    ax.legend()
    fig.savefig(_svg_path(cfg), format="svg", bbox_inches="tight")
    plt.close(fig)


def _plot_compare(cfg, columns) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4.5))
    s = columns["s"]
    for name, series in columns.items():
        if name in ("s", "x", "y"):
            continue
        style = dict(linewidth=1.8) if name == "exact" else dict(linewidth=0.9)
        ax.plot(s, series, label=name, **style)
    ax.set_xlabel("position along y = x")
    ax.set_ylabel("|Re u|")
    ax.legend(fontsize=8)
    fig.savefig(_svg_path(cfg), format="svg", bbox_inches="tight")
    plt.close(fig)


def run_study(cfg: ExperimentConfig):
    """Dispatch a configured study; returns the study's native result."""
    runner = {"stability": run_stability, "convergence": run_convergence,
              "pollution": run_pollution, "compare": run_compare,
              "single": run_single}[cfg.study]
    return runner(cfg)
