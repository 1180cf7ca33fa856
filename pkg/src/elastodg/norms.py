"""Mesh-dependent norms and error norms.

For piecewise-linear fields every strain and traction is elementwise
constant, so the broken energy seminorm and both penalty functionals are
integrated exactly; quadrature only enters for mass-type terms (degree 2)
and for errors against the analytic field (caller-chosen degree, default
10 because the field oscillates at frequency omega).

    seminorm_1h^2 = sum_K lam ||div v||^2 + 2 mu ||eps(v)||_F^2
    norm_1h^2     = seminorm_1h^2 + j0 + j1
    triple^2      = norm_1h^2 + sum_e (h_e / gamma0) ||{sigma(v) n}||_e^2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .assembly import EdgePack, _edge_points, _element_points, pack_edges, trace_tensor
from .exact import Solution, manufactured
from .mesh import Mesh, geometry
from .params import ProblemParams
from .quadrature import segment_rule, triangle_bary, triangle_rule
from .spaces import DgField, all_element_coeffs

ELEMENT_CHUNK = 20_000
EDGE_CHUNK = 40_000


@dataclass(frozen=True)
class NormReport:
    seminorm_1h: float
    norm_1h: float
    triple_norm_1h: float
    l2_domain: float
    l2_boundary: float
    j0: float
    j1: float


def _element_gradients(field: DgField) -> np.ndarray:
    """Constant gradient per element, shape (nt, 2, 2), [e, c, j]."""
    _, grads = geometry(field.mesh)
    return np.einsum("eic,eij->ecj", all_element_coeffs(field), grads)


def _side_tractions(field: DgField, pack: EdgePack, p: ProblemParams,
                    Gv: Optional[np.ndarray] = None) -> np.ndarray:
    """sigma(v) n_e on the plus and minus side, shape (ne, 2, 2)."""
    if Gv is None:
        Gv = _element_gradients(field)
    out = np.empty((pack.count, 2, 2), dtype=Gv.dtype)
    for k, elems in enumerate((pack.plus, pack.minus)):
        G = Gv[elems]
        strain = 0.5 * (G + np.swapaxes(G, 1, 2))
        div = np.trace(G, axis1=1, axis2=2)
        sigma = 2.0 * p.mu * strain + p.lam * div[:, None, None] * np.eye(2)
        out[:, k] = np.einsum("ecd,ed->ec", sigma, pack.normal)
    return out


def _edge_values(field: DgField, pack: EdgePack, t: np.ndarray):
    """Plus and minus traces along each interior edge, two (ne, nq, 2)."""
    C = all_element_coeffs(field)
    T_p = trace_tensor(pack.la_plus, pack.lb_plus, t)
    T_m = trace_tensor(pack.la_minus, pack.lb_minus, t)
    vp = np.einsum("eqi,eic->eqc", T_p, C[pack.plus])
    vm = np.einsum("eqi,eic->eqc", T_m, C[pack.minus])
    return vp, vm


def _boundary_values(field: DgField, pack: EdgePack, t: np.ndarray) -> np.ndarray:
    C = all_element_coeffs(field)
    T = trace_tensor(pack.la_plus, pack.lb_plus, t)
    return np.einsum("eqi,eic->eqc", T, C[pack.plus])


def _abs2(a: np.ndarray) -> np.ndarray:
    return np.real(a * np.conj(a))


def norms_of(field: DgField, p: ProblemParams) -> NormReport:
    mesh = field.mesh
    areas, _ = geometry(mesh)
    Gv = _element_gradients(field)
    div = np.trace(Gv, axis1=1, axis2=2)
    eps = 0.5 * (Gv + np.swapaxes(Gv, 1, 2))
    sem_sq = float(np.sum(areas * (p.lam * _abs2(div)
                                   + 2.0 * p.mu * np.sum(_abs2(eps), axis=(1, 2)))))

    rule = triangle_rule(2)
    bary = triangle_bary(rule)
    vals = np.einsum("qi,eic->eqc", bary, all_element_coeffs(field))
    l2_sq = float(np.sum(2.0 * areas[:, None] * np.einsum(
        "q,eqc->eq", rule.weights, _abs2(vals))))

    srule = segment_rule(2)
    interior = pack_edges(mesh.interior_edges, interior=True)
    j0 = j1 = flux_sq = 0.0
    if interior.count:
        vp, vm = _edge_values(field, interior, srule.points)
        jmp = vp - vm
        j0 = float(p.gamma0 * np.sum(np.einsum(
            "q,eqc->e", srule.weights, _abs2(jmp))))
        tr = _side_tractions(field, interior, p, Gv)
        j1 = float(p.gamma1 * np.sum(
            interior.h**2 * np.sum(_abs2(tr[:, 0] - tr[:, 1]), axis=1)))
        avg = 0.5 * (tr[:, 0] + tr[:, 1])
        flux_sq = float(np.sum(
            interior.h**2 / p.gamma0 * np.sum(_abs2(avg), axis=1)))

    bpack = pack_edges(mesh.boundary_edges, interior=False)
    bvals = _boundary_values(field, bpack, srule.points)
    l2b_sq = float(np.sum(bpack.h[:, None] * np.einsum(
        "q,eqc->eq", srule.weights, _abs2(bvals))))

    norm_sq = sem_sq + j0 + j1
    return NormReport(seminorm_1h=np.sqrt(sem_sq),
                      norm_1h=np.sqrt(norm_sq),
                      triple_norm_1h=np.sqrt(norm_sq + flux_sq),
                      l2_domain=np.sqrt(l2_sq),
                      l2_boundary=np.sqrt(l2b_sq),
                      j0=j0, j1=j1)


def interface_flux_pairing(field: DgField, p: ProblemParams) -> complex:
    """sum_e <{sigma(v) n_e}, [v]>_e over interior edges, matrix-free."""
    mesh = field.mesh
    interior = pack_edges(mesh.interior_edges, interior=True)
    if not interior.count:
        return 0.0 + 0.0j
    srule = segment_rule(2)
    vp, vm = _edge_values(field, interior, srule.points)
    jmp_int = np.einsum("q,eqc->ec", srule.weights, np.conj(vp - vm))
    tr = _side_tractions(field, interior, p)
    avg = 0.5 * (tr[:, 0] + tr[:, 1])
    return complex(np.sum(interior.h * np.einsum("ec,ec->e", avg, jmp_int)))


def impedance_pairing(field: DgField, p: ProblemParams) -> complex:
    """<A v, v>_Gamma, real and nonnegative for SPD A up to roundoff."""
    mesh = field.mesh
    bpack = pack_edges(mesh.boundary_edges, interior=False)
    srule = segment_rule(2)
    vals = _boundary_values(field, bpack, srule.points)
    integrand = np.einsum("q,eqc,eqc->e", srule.weights, vals @ p.A.T, np.conj(vals))
    return complex(np.sum(bpack.h * integrand))


def _chunks(total: int, size: int):
    for start in range(0, total, size):
        yield slice(start, min(start + size, total))


def error_vs_exact(field: DgField, p: ProblemParams, quad_degree: int = 10,
                   solution: Optional[Solution] = None) -> NormReport:
    """Norms of (analytic field minus discrete field).

    The analytic field is continuous with continuous traction, so the
    jump terms of the error coincide with those of the discrete field;
    volume and average-traction terms are integrated at quad_degree.
    """
    sol = manufactured(p) if solution is None else solution
    mesh = field.mesh
    areas, _ = geometry(mesh)
    Gv = _element_gradients(field)
    C = all_element_coeffs(field)

    rule = triangle_rule(quad_degree)
    bary = triangle_bary(rule)
    sem_sq = l2_sq = 0.0
    for sl in _chunks(mesh.num_elements, ELEMENT_CHUNK):
        pts = np.einsum("qv,evj->eqj", bary, mesh.vertices[mesh.triangles[sl]])
        gw = sol.grad(pts) - Gv[sl, None]
        dive = np.trace(gw, axis1=-2, axis2=-1)
        epse = 0.5 * (gw + np.swapaxes(gw, -1, -2))
        sem_sq += float(np.sum(2.0 * areas[sl, None] * np.einsum(
            "q,eq->eq", rule.weights,
            p.lam * _abs2(dive) + 2.0 * p.mu * np.sum(_abs2(epse), axis=(2, 3)))))
        ue = sol.u(pts) - np.einsum("qi,eic->eqc", bary, C[sl])
        l2_sq += float(np.sum(2.0 * areas[sl, None] * np.einsum(
            "q,eqc->eq", rule.weights, _abs2(ue))))

    own = norms_of(field, p)
    j0, j1 = own.j0, own.j1

    srule = segment_rule(min(quad_degree, 21))
    interior = pack_edges(mesh.interior_edges, interior=True)
    flux_sq = 0.0
    if interior.count:
        tr = _side_tractions(field, interior, p, Gv)
        avg_h = 0.5 * (tr[:, 0] + tr[:, 1])
        for sl in _chunks(interior.count, EDGE_CHUNK):
            sub = EdgePack(plus=interior.plus[sl], minus=interior.minus[sl],
                           normal=interior.normal[sl], h=interior.h[sl],
                           la_plus=interior.la_plus[sl], lb_plus=interior.lb_plus[sl],
                           la_minus=interior.la_minus[sl], lb_minus=interior.lb_minus[sl],
                           a=interior.a[sl], b=interior.b[sl])
            xq = _edge_points(mesh, sub, srule.points)
            t_exact = np.einsum("eqcd,ed->eqc", sol.stress(xq), sub.normal)
            diff = t_exact - avg_h[sl][:, None, :]
            flux_sq += float(np.sum(sub.h**2 / p.gamma0 * np.einsum(
                "q,eqc->e", srule.weights, _abs2(diff))))

    bpack = pack_edges(mesh.boundary_edges, interior=False)
    xb = _edge_points(mesh, bpack, srule.points)
    be = sol.u(xb) - _boundary_values(field, bpack, srule.points)
    l2b_sq = float(np.sum(bpack.h[:, None] * np.einsum(
        "q,eqc->eq", srule.weights, _abs2(be))))

    norm_sq = sem_sq + j0 + j1
    return NormReport(seminorm_1h=np.sqrt(sem_sq),
                      norm_1h=np.sqrt(norm_sq),
                      triple_norm_1h=np.sqrt(norm_sq + flux_sq),
                      l2_domain=np.sqrt(l2_sq),
                      l2_boundary=np.sqrt(l2b_sq),
                      j0=j0, j1=j1)


def exact_norms(mesh: Mesh, p: ProblemParams, quad_degree: int = 10,
                solution: Optional[Solution] = None) -> NormReport:
    """Norms of the analytic field itself, by the same quadrature used
    for errors (denominators of relative errors)."""
    sol = manufactured(p) if solution is None else solution
    areas, _ = geometry(mesh)
    rule = triangle_rule(quad_degree)
    bary = triangle_bary(rule)
    sem_sq = l2_sq = 0.0
    for sl in _chunks(mesh.num_elements, ELEMENT_CHUNK):
        pts = np.einsum("qv,evj->eqj", bary, mesh.vertices[mesh.triangles[sl]])
        gw = sol.grad(pts)
        divw = np.trace(gw, axis1=-2, axis2=-1)
        epsw = 0.5 * (gw + np.swapaxes(gw, -1, -2))
        sem_sq += float(np.sum(2.0 * areas[sl, None] * np.einsum(
            "q,eq->eq", rule.weights,
            p.lam * _abs2(divw) + 2.0 * p.mu * np.sum(_abs2(epsw), axis=(2, 3)))))
        l2_sq += float(np.sum(2.0 * areas[sl, None] * np.einsum(
            "q,eqc->eq", rule.weights, _abs2(sol.u(pts)))))

    srule = segment_rule(min(quad_degree, 21))
    interior = pack_edges(mesh.interior_edges, interior=True)
    flux_sq = 0.0
    for sl in _chunks(interior.count, EDGE_CHUNK):
        sub = EdgePack(plus=interior.plus[sl], minus=interior.minus[sl],
                       normal=interior.normal[sl], h=interior.h[sl],
                       la_plus=interior.la_plus[sl], lb_plus=interior.lb_plus[sl],
                       la_minus=interior.la_minus[sl], lb_minus=interior.lb_minus[sl],
                       a=interior.a[sl], b=interior.b[sl])
        xq = _edge_points(mesh, sub, srule.points)
        t_exact = np.einsum("eqcd,ed->eqc", sol.stress(xq), sub.normal)
        flux_sq += float(np.sum(sub.h**2 / p.gamma0 * np.einsum(
            "q,eqc->e", srule.weights, _abs2(t_exact))))

    bpack = pack_edges(mesh.boundary_edges, interior=False)
    xb = _edge_points(mesh, bpack, srule.points)
    l2b_sq = float(np.sum(bpack.h[:, None] * np.einsum(
        "q,eqc->eq", srule.weights, _abs2(sol.u(xb)))))

    norm_sq = sem_sq
    return NormReport(seminorm_1h=np.sqrt(sem_sq),
                      norm_1h=np.sqrt(norm_sq),
                      triple_norm_1h=np.sqrt(norm_sq + flux_sq),
                      l2_domain=np.sqrt(l2_sq),
                      l2_boundary=np.sqrt(l2b_sq),
                      j0=0.0, j1=0.0)


def relative_errors(err: NormReport, ref: NormReport) -> tuple[float, float]:
    """(H1-seminorm, L2) errors scaled by the analytic field's norms."""
    return err.seminorm_1h / ref.seminorm_1h, err.l2_domain / ref.l2_domain
