"""Acceptance gate: twelve numbered checks covering the discrete
identities, stability, convergence, pollution, and the high-frequency
comparison, at the tolerances the library commits to.

Each test prints one `[acceptance] criterion N ...: PASS/FAIL` line
(visible with `pytest -s`); the test names mirror the numbering so a
plain `-v` run reads as the same checklist.  Criterion 6 currently fails
by design of the measurement, not of the code: the manufactured source
behaves like 1/r at the origin, so refining the quadrature degree from 4
to 10 improves the worst-element consistency residual only algebraically
(measured drop about 2.8x against the 10x target; away from the origin
the same sweep drops by more than 100x).  The check is asserted at its
stated threshold rather than weakened.
"""

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from elastodg import (DgField, DgSpace, FemSpace, ProblemParams,
                      assemble_dg, assemble_elliptic_projection, assemble_fem,
                      build_uniform, consistency_residual, error_vs_exact,
                      exact_norms, fem_to_dg, impedance_pairing,
                      interface_flux_pairing, norms_of, relative_errors,
                      resolve_rule, self_check, solve)

OMEGAS_IDENTITY = (1.0, 10.0, 100.0)


def report(num, label, ok, detail):
    print(f"[acceptance] criterion {num} ({label}): "
          f"{'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def mesh8():
    return build_uniform(8)


@pytest.fixture(scope="module")
def systems8(mesh8):
    space = DgSpace(mesh8)
    out = {}
    for w in OMEGAS_IDENTITY:
        p = ProblemParams(omega=w)
        out[w] = (assemble_dg(mesh8, space, p), p)
    return out


def random_fields(space, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield DgField(space, rng.standard_normal(space.ndofs)
                      + 1j * rng.standard_normal(space.ndofs))


def identity_deviations(system, p, count, seed):
    devs_im, devs_re = [], []
    for v in random_fields(system.space, count, seed):
        q = complex(np.vdot(v.coeffs, system.matrix @ v.coeffs))
        rep = norms_of(v, p)
        flux = interface_flux_pairing(v, p)
        imp = impedance_pairing(v, p)
        re = (rep.seminorm_1h**2 - p.omega**2 * p.rho * rep.l2_domain**2
              - 2.0 * flux.real)
        im = rep.j0 + rep.j1 + p.omega * imp.real
        scale = (rep.seminorm_1h**2 + p.omega**2 * p.rho * rep.l2_domain**2
                 + 2.0 * abs(flux) + rep.j0 + rep.j1 + p.omega * abs(imp))
        devs_im.append(abs(q.imag - im) / scale)
        devs_re.append(abs(q.real - re) / scale)
    return max(devs_re), max(devs_im)


def test_criterion_01_imaginary_identity(systems8):
    worst = 0.0
    for w, (system, p) in systems8.items():
        _, dev = identity_deviations(system, p, 100, seed=int(w))
        worst = max(worst, dev)
    ok = worst <= 1e-12
    assert report(1, "imaginary-part identity", ok,
                  f"max relative deviation {worst:.3e} (tol 1e-12)")


def test_criterion_02_real_identity(systems8):
    worst = 0.0
    for w, (system, p) in systems8.items():
        dev, _ = identity_deviations(system, p, 100, seed=1000 + int(w))
        worst = max(worst, dev)
    ok = worst <= 1e-12
    assert report(2, "real-part identity", ok,
                  f"max relative deviation {worst:.3e} (tol 1e-12)")


def test_criterion_03_hermitian_split_psd(systems8):
    worst = np.inf
    for w, (system, _) in systems8.items():
        M = system.matrix
        H2 = (M - M.conj().T) / 2j
        rng = np.random.default_rng(7 + int(w))
        for _ in range(100):
            z = rng.standard_normal(M.shape[0]) \
                + 1j * rng.standard_normal(M.shape[0])
            worst = min(worst, np.vdot(z, H2 @ z).real / np.vdot(z, z).real)
    ok = worst >= -1e-12
    assert report(3, "Hermitian-split positivity", ok,
                  f"min Re(z*H2z)/|z|^2 = {worst:.3e} (floor -1e-12)")


def test_criterion_04_projection_orthogonality():
    mesh = build_uniform(16)
    space = DgSpace(mesh)
    p = ProblemParams(omega=5.0)
    system = assemble_elliptic_projection(mesh, space, p)
    x = spla.spsolve(system.matrix.tocsc(), system.rhs)
    residual = system.rhs - system.matrix @ x
    scale = np.linalg.norm(system.rhs)
    worst = 0.0
    for z in random_fields(space, 20, seed=42):
        val = abs(np.vdot(z.coeffs, residual)) \
            / (scale * np.linalg.norm(z.coeffs))
        worst = max(worst, val)
    ok = worst <= 1e-9
    assert report(4, "projection orthogonality", ok,
                  f"max normalized pairing {worst:.3e} (tol 1e-9)")


def test_criterion_05_norm_ordering(mesh8):
    space = DgSpace(mesh8)
    p = ProblemParams(omega=5.0)
    worst = 0.0
    for v in random_fields(space, 100, seed=5):
        rep = norms_of(v, p)
        worst = max(worst, (rep.norm_1h - rep.triple_norm_1h)
                    / rep.triple_norm_1h)
    ok = worst <= 1e-14
    assert report(5, "norm-equivalence lower bound", ok,
                  f"max (norm - triple)/triple = {worst:.3e} (tol 1e-14)")


def test_criterion_06_consistency_refinement(mesh8):
    p = ProblemParams(omega=5.0)
    r4 = consistency_residual(mesh8, p, 4)
    r10 = consistency_residual(mesh8, p, 10)
    drop = r4 / r10
    ok = drop >= 10.0
    assert report(6, "consistency quadrature refinement", ok,
                  f"drop {drop:.2f}x from degree 4 to 10 (need >= 10x; "
                  f"limited by the 1/r source at the origin)")


def test_criterion_07_convergence_rates():
    p = ProblemParams(omega=5.0)
    hs, h1, l2 = [], [], []
    for n in (8, 16, 32, 64):
        mesh = build_uniform(n)
        space = DgSpace(mesh)
        system = assemble_dg(mesh, space, p, quad_rhs_degree=12)
        rep = solve(system, tol=1e-10)
        err = error_vs_exact(DgField(space, rep.solution), p, quad_degree=12)
        ref = exact_norms(mesh, p, quad_degree=12)
        rh, rl = relative_errors(err, ref)
        hs.append(1.0 / n)
        h1.append(rh)
        l2.append(rl)
    xs = np.log(hs) - np.mean(np.log(hs))
    s1 = float(xs @ (np.log(h1) - np.mean(np.log(h1))) / (xs @ xs))
    s2 = float(xs @ (np.log(l2) - np.mean(np.log(l2))) / (xs @ xs))
    ok = abs(s1 - 1.0) <= 0.15 and abs(s2 - 2.0) <= 0.25
    assert report(7, "convergence rates", ok,
                  f"H1-seminorm slope {s1:.3f} (1.0 +- 0.15), "
                  f"L2 slope {s2:.3f} (2.0 +- 0.25)")


def test_criterion_08_unconditional_solvability():
    worst = 0.0
    for n in (20, 100):
        for w in (1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 150.0, 200.0):
            p = ProblemParams(omega=w)
            mesh = build_uniform(n)
            space = DgSpace(mesh)
            system = assemble_dg(mesh, space, p)
            rep = solve(system, tol=1e-10, method="direct")
            own = norms_of(DgField(space, rep.solution), p)
            assert np.isfinite(own.norm_1h) and np.isfinite(own.j0) \
                and np.isfinite(own.j1)
            worst = max(worst, rep.residual)
    ok = worst <= 1e-10
    assert report(8, "unconditional solvability", ok,
                  f"16 solves, max residual {worst:.3e} (tol 1e-10)")


def _rule_errors(rule, omegas, quad=10):
    errs = []
    for w in omegas:
        n = resolve_rule(rule, w)
        p = ProblemParams(omega=w)
        mesh = build_uniform(n)
        space = DgSpace(mesh)
        system = assemble_dg(mesh, space, p, quad_rhs_degree=quad)
        rep = solve(system, tol=1e-10, method="direct")
        err = error_vs_exact(DgField(space, rep.solution), p, quad_degree=quad)
        ref = exact_norms(mesh, p, quad_degree=quad)
        rh, rl = relative_errors(err, ref)
        errs.append((rh, rl))
    return errs


def test_criterion_09_pollution_present():
    errs = [e[0] for e in _rule_errors("wh=0.5", (10.0, 20.0, 40.0))]
    inversions = [max(0.0, (a - b) / a) for a, b in zip(errs, errs[1:])]
    bad = [x for x in inversions if x > 0]
    ok = len(bad) <= 1 and all(x <= 0.05 for x in bad)
    assert report(9, "pollution present under wh=0.5", ok,
                  "relative seminorm errors "
                  + " -> ".join(f"{e:.4f}" for e in errs))


def test_criterion_10_pollution_eliminated():
    errs = _rule_errors("w3h2=1", (10.0, 40.0))
    ratio_h1 = errs[1][0] / errs[0][0]
    ratio_l2 = errs[1][1] / errs[0][1]
    ok = ratio_h1 <= 1.5 and ratio_l2 <= 1.5
    assert report(10, "pollution eliminated under w3h2=1", ok,
                  f"omega 40 vs 10 error ratios: seminorm {ratio_h1:.3f}, "
                  f"L2 {ratio_l2:.3f} (cap 1.5)")


def test_criterion_11_dg_beats_fem():
    p = ProblemParams(omega=100.0)
    mesh = build_uniform(120)
    dg_space = DgSpace(mesh)
    rep = solve(assemble_dg(mesh, dg_space, p), tol=1e-10, method="direct")
    err = error_vs_exact(DgField(dg_space, rep.solution), p)
    ref = exact_norms(mesh, p)
    _, dg_l2 = relative_errors(err, ref)

    fem_space = FemSpace(mesh)
    repf = solve(assemble_fem(mesh, fem_space, p), tol=1e-10, method="direct")
    fem_field = fem_to_dg(DgField(fem_space, repf.solution))
    errf = error_vs_exact(fem_field, p)
    _, fem_l2 = relative_errors(errf, ref)
    ok = dg_l2 < fem_l2
    assert report(11, "DG beats FEM at omega=100", ok,
                  f"relative L2: DG {dg_l2:.4f} < FEM {fem_l2:.4f}")


def test_criterion_12_manufactured_self_check():
    devs = self_check(ProblemParams(omega=5.0), samples=100, seed=0)
    worst = max(devs.values())
    ok = worst < 1e-5
    assert report(12, "manufactured-solution self-check", ok,
                  f"max derivative deviation {worst:.3e} (tol 1e-5)")
