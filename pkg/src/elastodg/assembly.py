"""Assembly of the penalized DG system and its relatives.

The sesquilinear form splits into

    A_h(u, v) = b_h(u, v) + i J0(u, v) + i J1(u, v)
                - omega^2 rho (u, v)_Omega + i omega <A u, v>_Gamma,

with b_h the elementwise elastic energy plus consistency flux terms on
interior edges (symmetrization parameter fixed at -1) and J0, J1 the
displacement- and traction-jump penalties.  Matrices follow the
convention M[row = test, col = trial] = A_h(phi_trial, phi_test); the
basis is real, so M = S1 + i S2 with S1, S2 real symmetric, and the
imaginary part S2 collects exactly J0 + J1 + omega <A., .>_Gamma.

Everything is built from dense local blocks, vectorized over elements
and edge chunks with numpy, then scattered through COO into CSR.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .exact import Solution, manufactured
from .mesh import EdgeInfo, Mesh, geometry
from .params import ProblemParams
from .quadrature import segment_rule, triangle_bary, triangle_rule
from .spaces import DgField, DgSpace, FemSpace, all_element_coeffs, fem_to_dg

EDGE_CHUNK = 40_000   # caps the (chunk, 12, 12) dense block tensor


@dataclass
class DgSystem:
    """Assembled sparse system with its provenance and diagnostics."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    space: Union[DgSpace, FemSpace, None]
    params: Optional[ProblemParams]
    nnz: int = 0
    assemble_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.space is not None:
            n = self.space.ndofs
            if self.matrix.shape != (n, n) or self.rhs.shape != (n,):
                raise ValueError("matrix/rhs size does not match space")


@dataclass(frozen=True)
class EdgePack:
    """Edge topology flattened into arrays for vectorized kernels."""

    plus: np.ndarray              # (ne,) element indices
    minus: Optional[np.ndarray]   # (ne,) or None for boundary packs
    normal: np.ndarray            # (ne, 2) outward from plus
    h: np.ndarray                 # (ne,)
    la_plus: np.ndarray           # (ne,) local vertex of endpoint a in plus
    lb_plus: np.ndarray
    la_minus: Optional[np.ndarray]
    lb_minus: Optional[np.ndarray]
    a: np.ndarray                 # (ne,) global vertex index of endpoint a
    b: np.ndarray

    @property
    def count(self) -> int:
        return self.h.shape[0]


def pack_edges(edges: list[EdgeInfo], interior: bool) -> EdgePack:
    ne = len(edges)
    plus = np.empty(ne, dtype=np.int64)
    minus = np.empty(ne, dtype=np.int64) if interior else None
    normal = np.empty((ne, 2))
    h = np.empty(ne)
    la_p = np.empty(ne, dtype=np.int64)
    lb_p = np.empty(ne, dtype=np.int64)
    la_m = np.empty(ne, dtype=np.int64) if interior else None
    lb_m = np.empty(ne, dtype=np.int64) if interior else None
    va = np.empty(ne, dtype=np.int64)
    vb = np.empty(ne, dtype=np.int64)
    for k, e in enumerate(edges):
        plus[k] = e.plus_element
        normal[k] = e.normal
        h[k] = e.h_e
        la_p[k], lb_p[k] = e.plus_local
        va[k], vb[k] = e.endpoints
        if interior:
            minus[k] = e.minus_element
            la_m[k], lb_m[k] = e.minus_local
    return EdgePack(plus=plus, minus=minus, normal=normal, h=h,
                    la_plus=la_p, lb_plus=lb_p, la_minus=la_m, lb_minus=lb_m,
                    a=va, b=vb)


def trace_tensor(la: np.ndarray, lb: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Hat-function traces T[e, q, i] = lambda_i(x_e(t_q)) on each edge."""
    ne, nq = la.shape[0], t.shape[0]
    T = np.zeros((ne, nq, 3))
    rows = np.arange(ne)[:, None]
    qs = np.arange(nq)[None, :]
    T[rows, qs, la[:, None]] = 1.0 - t[None, :]
    T[rows, qs, lb[:, None]] = t[None, :]
    return T


def traction_tensor(grads: np.ndarray, elems: np.ndarray, normal: np.ndarray,
                    lam: float, mu: float) -> np.ndarray:
    """Basis tractions sigma(phi_{j,d}) n as t[e, 2j+d, c], shape (ne, 6, 2)."""
    G = grads[elems]                                   # (ne, 3, 2)
    gdotn = np.einsum("ejk,ek->ej", G, normal)         # (ne, 3)
    eye = np.eye(2)
    t = (mu * gdotn[:, :, None, None] * eye[None, None]
         + mu * G[:, :, None, :] * normal[:, None, :, None]
         + lam * G[:, :, :, None] * normal[:, None, None, :])
    return t.reshape(-1, 6, 2)                         # index [(j,d), c]


def _element_points(mesh: Mesh, bary: np.ndarray) -> np.ndarray:
    """Physical quadrature points per element, shape (nt, nq, 2)."""
    return np.einsum("qv,evj->eqj", bary, mesh.vertices[mesh.triangles])


def _edge_points(mesh: Mesh, pack: EdgePack, t: np.ndarray) -> np.ndarray:
    """Physical points along each edge at parameters t, shape (ne, nq, 2)."""
    va = mesh.vertices[pack.a]
    vb = mesh.vertices[pack.b]
    return va[:, None, :] + t[None, :, None] * (vb - va)[:, None, :]


def _volume_blocks(mesh: Mesh, p: ProblemParams, include_mass: bool) -> np.ndarray:
    """Local 6x6 blocks of the volume terms, complex (nt, 6, 6)."""
    areas, grads = geometry(mesh)
    nt = mesh.num_elements
    lam, mu = p.lam, p.mu
    gij = np.einsum("eik,ejk->eij", grads, grads)
    eye = np.eye(2)
    stiff = (lam * np.einsum("eic,ejd->eicjd", grads, grads)
             + mu * gij[:, :, None, :, None] * eye[None, :, None, :]
             + mu * np.einsum("eid,ejc->eicjd", grads, grads))
    blocks = (areas[:, None, None] * stiff.reshape(nt, 6, 6)).astype(complex)
    if include_mass:
        rule = triangle_rule(2)
        bary = triangle_bary(rule)
        mref = np.einsum("q,qi,qj->ij", rule.weights, bary, bary)
        mass6 = np.kron(mref, eye)
        blocks += (-p.omega**2 * p.rho) * 2.0 * areas[:, None, None] * mass6[None]
    return blocks


def _boundary_blocks(mesh: Mesh, pack: EdgePack, p: ProblemParams) -> np.ndarray:
    """Local 6x6 blocks of i omega <A u, v> on boundary edges."""
    rule = segment_rule(2)
    T = trace_tensor(pack.la_plus, pack.lb_plus, rule.points)
    TT = np.einsum("q,eqi,eqj->eij", rule.weights, T, T)
    blocks = np.einsum("eij,cd->eicjd", TT, p.A).reshape(-1, 6, 6)
    return 1j * p.omega * pack.h[:, None, None] * blocks


def _interior_blocks(mesh: Mesh, pack: EdgePack, p: ProblemParams,
                     sl: slice) -> np.ndarray:
    """12x12 blocks (flux + i J0 + i J1) for a chunk of interior edges.

    Dof layout per edge: [plus 0..5, minus 6..11]; jump sign +1 on plus,
    -1 on minus; the edge normal (outward from plus) is used for the
    tractions of both sides, which is what makes every term independent
    of the element labeling.
    """
    _, grads = geometry(mesh)
    lam, mu = p.lam, p.mu
    rule = segment_rule(2)
    tq, wq = rule.points, rule.weights
    h = pack.h[sl]
    nrm = pack.normal[sl]
    ne = h.shape[0]

    T_p = trace_tensor(pack.la_plus[sl], pack.lb_plus[sl], tq)
    T_m = trace_tensor(pack.la_minus[sl], pack.lb_minus[sl], tq)
    t_p = traction_tensor(grads, pack.plus[sl], nrm, lam, mu)
    t_m = traction_tensor(grads, pack.minus[sl], nrm, lam, mu)

    eye = np.eye(2)
    # Ihat[s][e, 2i+c, c'] = (int_0^1 hat_i) * delta_{c c'} per side.
    blocks = np.zeros((ne, 12, 12), dtype=complex)
    sides = ((0, +1.0, T_p, t_p), (6, -1.0, T_m, t_m))
    TT = {}      # TT[(sv, su)][e, i, j] = sum_q w_q T_sv[q,i] T_su[q,j]
    for off_v, s_v, T_v, _ in sides:
        for off_u, s_u, T_u, _ in sides:
            TT[(off_v, off_u)] = np.einsum("q,eqi,eqj->eij", wq, T_v, T_u)
    Ihat = {off: np.einsum("eqi,q,cd->eicd", T, wq, eye).reshape(ne, 6, 2)
            for off, _, T, _ in sides}

    for off_v, s_v, T_v, t_v in sides:
        for off_u, s_u, T_u, t_u in sides:
            # -<{sigma(u) n}, [v]>: trial traction average against test jump
            f1 = -0.5 * s_v * h[:, None, None] * \
                np.einsum("eac,ebc->eab", Ihat[off_v], t_u)
            # eta <[u], {sigma(v) n}> with eta = -1
            f2 = -0.5 * s_u * h[:, None, None] * \
                np.einsum("ead,ebd->eab", t_v, Ihat[off_u])
            # i J0: (gamma0/h) displacement-jump penalty; h cancels
            j0 = 1j * p.gamma0 * s_v * s_u * \
                np.einsum("eij,cd->eicjd", TT[(off_v, off_u)], eye).reshape(ne, 6, 6)
            # i J1: gamma1 h traction-jump penalty; tractions constant on e
            j1 = 1j * p.gamma1 * (h**2)[:, None, None] * s_v * s_u * \
                np.einsum("ead,ebd->eab", t_v, t_u)
            blocks[:, off_v:off_v + 6, off_u:off_u + 6] = f1 + f2 + j0 + j1
    return blocks


def _scatter(blocks: np.ndarray, gdofs: np.ndarray, rows: np.ndarray,
             cols: np.ndarray, vals: np.ndarray, start: int) -> int:
    """Append dense blocks into preallocated COO arrays; returns new end."""
    ne, k, _ = blocks.shape
    stop = start + ne * k * k
    rows[start:stop] = np.repeat(gdofs, k, axis=1).ravel()
    cols[start:stop] = np.tile(gdofs, (1, k)).ravel()
    vals[start:stop] = blocks.ravel()
    return stop


def _element_gdofs(mesh: Mesh, space: Union[DgSpace, FemSpace]) -> np.ndarray:
    """Global dofs per element, shape (nt, 6), matching local ordering."""
    nt = mesh.num_elements
    if isinstance(space, DgSpace):
        return (6 * np.arange(nt)[:, None] + np.arange(6)[None, :])
    tris = mesh.triangles
    return 2 * tris[:, [0, 0, 1, 1, 2, 2]] + np.tile([0, 1], 3)[None, :]


def _dg_matrix(mesh: Mesh, p: ProblemParams, include_mass: bool) -> sp.csr_matrix:
    space = DgSpace(mesh)
    n = space.ndofs
    interior = pack_edges(mesh.interior_edges, interior=True)
    bdry = pack_edges(mesh.boundary_edges, interior=False)
    nt = mesh.num_elements
    nnz = 36 * nt + 144 * interior.count + 36 * bdry.count
    rows = np.empty(nnz, dtype=np.int32)
    cols = np.empty(nnz, dtype=np.int32)
    vals = np.empty(nnz, dtype=complex)

    gdofs = _element_gdofs(mesh, space)
    pos = _scatter(_volume_blocks(mesh, p, include_mass), gdofs,
                   rows, cols, vals, 0)
    pos = _scatter(_boundary_blocks(mesh, bdry, p), gdofs[bdry.plus],
                   rows, cols, vals, pos)
    for start in range(0, interior.count, EDGE_CHUNK):
        sl = slice(start, min(start + EDGE_CHUNK, interior.count))
        blocks = _interior_blocks(mesh, interior, p, sl)
        pair = np.hstack([gdofs[interior.plus[sl]], gdofs[interior.minus[sl]]])
        pos = _scatter(blocks, pair, rows, cols, vals, pos)
    assert pos == nnz

    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def mass_matrix(mesh: Mesh, space: Union[DgSpace, FemSpace]) -> sp.csr_matrix:
    """Plain L2 mass matrix (no density or frequency factors), used by the
    solver to shift the preconditioner for wave-regime systems."""
    areas, _ = geometry(mesh)
    rule = triangle_rule(2)
    bary = triangle_bary(rule)
    mref = np.einsum("q,qi,qj->ij", rule.weights, bary, bary)
    m6 = np.kron(mref, np.eye(2))
    blocks = 2.0 * areas[:, None, None] * m6[None]
    gdofs = _element_gdofs(mesh, space)
    rows = np.repeat(gdofs, 6, axis=1).ravel().astype(np.int32)
    cols = np.tile(gdofs, (1, 6)).ravel().astype(np.int32)
    n = space.ndofs
    mat = sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _fem_matrix(mesh: Mesh, p: ProblemParams) -> sp.csr_matrix:
    space = FemSpace(mesh)
    n = space.ndofs
    bdry = pack_edges(mesh.boundary_edges, interior=False)
    nt = mesh.num_elements
    nnz = 36 * nt + 36 * bdry.count
    rows = np.empty(nnz, dtype=np.int32)
    cols = np.empty(nnz, dtype=np.int32)
    vals = np.empty(nnz, dtype=complex)
    gdofs = _element_gdofs(mesh, space)
    pos = _scatter(_volume_blocks(mesh, p, include_mass=True), gdofs,
                   rows, cols, vals, 0)
    pos = _scatter(_boundary_blocks(mesh, bdry, p), gdofs[bdry.plus],
                   rows, cols, vals, pos)
    assert pos == nnz
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _rhs_vector(mesh: Mesh, space: Union[DgSpace, FemSpace], p: ProblemParams,
                solution: Solution, degree: int) -> np.ndarray:
    """(f, v)_Omega + <g, v>_Gamma for every test basis function."""
    rhs = np.zeros(space.ndofs, dtype=complex)
    areas, _ = geometry(mesh)
    rule = triangle_rule(degree)
    bary = triangle_bary(rule)
    pts = _element_points(mesh, bary)
    fvals = solution.f(pts)                            # (nt, nq, 2)
    local = 2.0 * areas[:, None] * np.einsum(
        "q,eqc,qi->eic", rule.weights, fvals, bary).reshape(-1, 6)
    np.add.at(rhs, _element_gdofs(mesh, space).ravel(), local.ravel())

    pack = pack_edges(mesh.boundary_edges, interior=False)
    srule = segment_rule(degree)
    T = trace_tensor(pack.la_plus, pack.lb_plus, srule.points)
    xq = _edge_points(mesh, pack, srule.points)
    gvals = solution.g(xq, pack.normal[:, None, :])    # (ne, nq, 2)
    local_b = pack.h[:, None] * np.einsum(
        "q,eqc,eqi->eic", srule.weights, gvals, T).reshape(-1, 6)
    np.add.at(rhs, _element_gdofs(mesh, space)[pack.plus].ravel(), local_b.ravel())
    return rhs


def _exact_action(mesh: Mesh, p: ProblemParams, solution: Solution,
                  degree: int, include_mass: bool) -> np.ndarray:
    """Vector L with L[a] = a_h(w, phi_a) + i omega <A w, phi_a>_Gamma
    (plus -omega^2 rho (w, phi_a) when include_mass), w the analytic field.

    w is continuous with continuous traction, so [w] = 0 kills the
    symmetrization flux and both penalties; only -<{sigma(w) n}, [v]>
    survives on interior edges.
    """
    space = DgSpace(mesh)
    out = np.zeros(space.ndofs, dtype=complex)
    areas, grads = geometry(mesh)
    gdofs = _element_gdofs(mesh, space)
    lam, mu = p.lam, p.mu

    rule = triangle_rule(degree)
    bary = triangle_bary(rule)
    pts = _element_points(mesh, bary)
    gw = solution.grad(pts)                            # (nt, nq, 2, 2)
    divw = np.trace(gw, axis1=-2, axis2=-1)
    strain = 0.5 * (gw + np.swapaxes(gw, -1, -2))
    # (2 mu eps(w), eps(phi_{i,c}))_K reduces to 2 mu (eps(w) g_i)_c.
    vol = 2.0 * areas[:, None, None] * (
        lam * np.einsum("q,eq,eic->eic", rule.weights, divw, grads)
        + 2.0 * mu * np.einsum("q,eqcd,eid->eic", rule.weights, strain, grads))
    accum = vol.reshape(-1, 6)
    if include_mass:
        w = solution.u(pts)
        mass = -p.omega**2 * p.rho * 2.0 * areas[:, None, None] * np.einsum(
            "q,eqc,qi->eic", rule.weights, w, bary)
        accum = accum + mass.reshape(-1, 6)
    np.add.at(out, gdofs.ravel(), accum.ravel())

    srule = segment_rule(min(degree, 21))
    interior = pack_edges(mesh.interior_edges, interior=True)
    xq = _edge_points(mesh, interior, srule.points)
    traction = np.einsum("eqcd,ed->eqc", solution.stress(xq), interior.normal)
    for side, sign, la, lb in (("plus", +1.0, interior.la_plus, interior.lb_plus),
                               ("minus", -1.0, interior.la_minus, interior.lb_minus)):
        T = trace_tensor(la, lb, srule.points)
        elems = interior.plus if side == "plus" else interior.minus
        local = -sign * interior.h[:, None, None] * np.einsum(
            "q,eqc,eqi->eic", srule.weights, traction, T)
        np.add.at(out, gdofs[elems].ravel(), local.reshape(-1, 6).ravel())

    bpack = pack_edges(mesh.boundary_edges, interior=False)
    xb = _edge_points(mesh, bpack, srule.points)
    wb = solution.u(xb)
    Aw = wb @ p.A.T
    T = trace_tensor(bpack.la_plus, bpack.lb_plus, srule.points)
    local = 1j * p.omega * bpack.h[:, None, None] * np.einsum(
        "q,eqc,eqi->eic", srule.weights, Aw, T)
    np.add.at(out, gdofs[bpack.plus].ravel(), local.reshape(-1, 6).ravel())
    return out


def assemble_dg(mesh: Mesh, space: DgSpace, p: ProblemParams,
                quad_rhs_degree: int = 10,
                solution: Optional[Solution] = None) -> DgSystem:
    """Assemble the full penalized DG system for the radial test problem
    (or any Solution bundle supplying f and g)."""
    if not isinstance(space, DgSpace) or space.mesh is not mesh:
        raise ValueError("space must be a DgSpace built on mesh")
    t0 = time.perf_counter()
    sol = manufactured(p) if solution is None else solution
    mat = _dg_matrix(mesh, p, include_mass=True)
    rhs = _rhs_vector(mesh, space, p, sol, quad_rhs_degree)
    dt = time.perf_counter() - t0
    return DgSystem(matrix=mat, rhs=rhs, space=space, params=p,
                    nnz=mat.nnz, assemble_seconds=dt)


def assemble_fem(mesh: Mesh, space: FemSpace, p: ProblemParams,
                 quad_rhs_degree: int = 10,
                 solution: Optional[Solution] = None) -> DgSystem:
    """Assemble the conforming P1 baseline: same volume, mass and
    boundary terms, no jumps or penalties."""
    if not isinstance(space, FemSpace) or space.mesh is not mesh:
        raise ValueError("space must be a FemSpace built on mesh")
    t0 = time.perf_counter()
    sol = manufactured(p) if solution is None else solution
    mat = _fem_matrix(mesh, p)
    rhs = _rhs_vector(mesh, space, p, sol, quad_rhs_degree)
    dt = time.perf_counter() - t0
    return DgSystem(matrix=mat, rhs=rhs, space=space, params=p,
                    nnz=mat.nnz, assemble_seconds=dt)


def assemble_elliptic_projection(mesh: Mesh, space: DgSpace, p: ProblemParams,
                                 solution: Optional[Solution] = None,
                                 quad_degree: int = 10) -> DgSystem:
    """System whose solution is the elliptic projection of the exact field:
    a_h(w_h, v) + i omega <A w_h, v>_Gamma = a_h(w, v) + i omega <A w, v>_Gamma."""
    if not isinstance(space, DgSpace) or space.mesh is not mesh:
        raise ValueError("space must be a DgSpace built on mesh")
    t0 = time.perf_counter()
    sol = manufactured(p) if solution is None else solution
    mat = _dg_matrix(mesh, p, include_mass=False)
    rhs = _exact_action(mesh, p, sol, quad_degree, include_mass=False)
    dt = time.perf_counter() - t0
    return DgSystem(matrix=mat, rhs=rhs, space=space, params=p,
                    nnz=mat.nnz, assemble_seconds=dt)


def _as_dg(field: DgField) -> DgField:
    if isinstance(field.space, FemSpace):
        return fem_to_dg(field)
    return field


def apply_form(mesh: Mesh, p: ProblemParams, left, right: DgField,
               quad_degree: int = 10) -> complex:
    """Evaluate A_h(left, right) matrix-free.

    left is a DgField (direct elementwise/edgewise accumulation, an
    independent path from the assembled matrix) or a Solution bundle
    (action of the form by the analytic field).  right is conjugated,
    matching the sesquilinear convention.
    """
    right = _as_dg(right)
    if isinstance(left, Solution):
        action = _exact_action(mesh, p, left, quad_degree, include_mass=True)
        return complex(np.vdot(right.coeffs, action))
    left = _as_dg(left)

    areas, grads = geometry(mesh)
    Cu = all_element_coeffs(left)                      # (nt, 3, 2)
    Cv = all_element_coeffs(right)
    Gu = np.einsum("eic,eij->ecj", Cu, grads)          # gradient per element
    Gv = np.einsum("eic,eij->ecj", Cv, grads)
    divu, divv = np.trace(Gu, axis1=1, axis2=2), np.trace(Gv, axis1=1, axis2=2)
    eps_u = 0.5 * (Gu + np.swapaxes(Gu, 1, 2))
    eps_v = 0.5 * (Gv + np.swapaxes(Gv, 1, 2))
    lam, mu = p.lam, p.mu
    total = np.sum(areas * (lam * divu * np.conj(divv)
                            + 2.0 * mu * np.einsum("ecd,ecd->e", eps_u, np.conj(eps_v))))

    rule = triangle_rule(2)
    bary = triangle_bary(rule)
    uq = np.einsum("qi,eic->eqc", bary, Cu)
    vq = np.einsum("qi,eic->eqc", bary, Cv)
    total += -p.omega**2 * p.rho * np.sum(
        2.0 * areas[:, None] * np.einsum("q,eqc,eqc->eq", rule.weights, uq, np.conj(vq)))

    srule = segment_rule(2)
    tq, wq = srule.points, srule.weights
    interior = pack_edges(mesh.interior_edges, interior=True)
    stress_u = _edge_tractions(Gu, interior, lam, mu)  # per side (ne, 2, 2)
    stress_v = _edge_tractions(Gv, interior, lam, mu)
    T_p = trace_tensor(interior.la_plus, interior.lb_plus, tq)
    T_m = trace_tensor(interior.la_minus, interior.lb_minus, tq)
    ju = np.einsum("eqi,eic->eqc", T_p, Cu[interior.plus]) \
        - np.einsum("eqi,eic->eqc", T_m, Cu[interior.minus])
    jv = np.einsum("eqi,eic->eqc", T_p, Cv[interior.plus]) \
        - np.einsum("eqi,eic->eqc", T_m, Cv[interior.minus])
    avg_tu = 0.5 * (stress_u[:, 0] + stress_u[:, 1])
    avg_tv = 0.5 * (stress_v[:, 0] + stress_v[:, 1])
    jmp_tu = stress_u[:, 0] - stress_u[:, 1]
    jmp_tv = stress_v[:, 0] - stress_v[:, 1]
    int_jv = np.einsum("q,eqc->ec", wq, np.conj(jv))
    int_ju = np.einsum("q,eqc->ec", wq, ju)
    total += np.sum(-interior.h * np.einsum("ec,ec->e", avg_tu, int_jv))
    total += np.sum(-interior.h * np.einsum("ec,ec->e", int_ju, np.conj(avg_tv)))
    total += 1j * p.gamma0 * np.sum(
        np.einsum("q,eqc,eqc->e", wq, ju, np.conj(jv)))
    total += 1j * p.gamma1 * np.sum(
        interior.h**2 * np.einsum("ec,ec->e", jmp_tu, np.conj(jmp_tv)))

    bpack = pack_edges(mesh.boundary_edges, interior=False)
    T_b = trace_tensor(bpack.la_plus, bpack.lb_plus, tq)
    ub = np.einsum("eqi,eic->eqc", T_b, Cu[bpack.plus])
    vb = np.einsum("eqi,eic->eqc", T_b, Cv[bpack.plus])
    total += 1j * p.omega * np.sum(
        bpack.h[:, None] * np.einsum("q,eqc,eqc->eq", wq, ub @ p.A.T, np.conj(vb)))
    return complex(total)


def _edge_tractions(Gfield: np.ndarray, pack: EdgePack, lam: float,
                    mu: float) -> np.ndarray:
    """sigma(v)|_K n_e for both sides of each interior edge, (ne, 2, 2)."""
    out = np.empty((pack.count, 2, 2), dtype=complex)
    for k, elems in enumerate((pack.plus, pack.minus)):
        G = Gfield[elems]
        strain = 0.5 * (G + np.swapaxes(G, 1, 2))
        div = np.trace(G, axis1=1, axis2=2)
        sigma = 2.0 * mu * strain + lam * div[:, None, None] * np.eye(2)
        out[:, k] = np.einsum("ecd,ed->ec", sigma, pack.normal)
    return out


def consistency_residual(mesh: Mesh, p: ProblemParams, quad_degree: int,
                         solution: Optional[Solution] = None) -> float:
    """max_a |A_h(u, phi_a) - (f, phi_a) - <g, phi_a>| with u analytic.

    u solves the PDE exactly, so this isolates the quadrature error of
    the two sides (they discretize the same identity through different
    integrals).
    """
    sol = manufactured(p) if solution is None else solution
    space = DgSpace(mesh)
    action = _exact_action(mesh, p, sol, quad_degree, include_mass=True)
    rhs = _rhs_vector(mesh, space, p, sol, quad_degree)
    return float(np.max(np.abs(action - rhs)))


def dump_matrix(system: DgSystem, path: str) -> None:
    """Matrix Market coordinate dump (complex general) for external checks."""
    from scipy.io import mmwrite
    mmwrite(path, system.matrix.tocoo())
