"""Closed-form test solution of the elastic Helmholtz problem.

The displacement is radial in each component,

    u(x) = (1 / (omega^2 r)) [ e^{+i omega r} - 1,  e^{-i omega r} - 1 ]^T,
    r = |x|,

so every derived field reduces to scalar factors G(r) = (e^{zr} - 1) /
(omega^2 r) with z = +-i omega and their first two r-derivatives.  Writing
w = z r gives G = (z/omega^2) phi(w), G' = (z^2/omega^2) phi'(w), G'' =
(z^3/omega^2) phi''(w) with the entire function phi(w) = (e^w - 1)/w.  The
closed forms of phi', phi'' cancel catastrophically as w -> 0, so below
|w| = 1/2 they are evaluated by truncated power series instead; both
branches are accurate at the switch radius r = 1/(2 omega).

u is H^1 but not H^2 near the origin: grad u is bounded but direction
dependent at x = 0, and div sigma(u) grows like 1/r.  The source term f
inherits that mild singularity; it is finite at every nonzero point and
quadrature never samples the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable

import numpy as np

from .params import ProblemParams

# Switch to the series branch of phi, phi', phi'' when |w| < W_GUARD.
# Truncation error at the boundary is ~ 0.5^18/19! ~ 1e-23 relative, and
# the closed form is itself accurate there, so the branches agree to
# roughly machine precision at r = W_GUARD / omega.
W_GUARD = 0.5
_NTERMS = 18

# Ascending power-series coefficients of phi(w) = (e^w - 1)/w and its
# first two derivatives: phi = sum w^k/(k+1)!.
_C0 = np.array([1.0 / factorial(k + 1) for k in range(_NTERMS)])
_C1 = np.array([(k + 1) / factorial(k + 2) for k in range(_NTERMS)])
_C2 = np.array([(k + 1) * (k + 2) / factorial(k + 3) for k in range(_NTERMS)])

# Denominator guard: keeps x/r finite (and zero) at the exact origin
# without perturbing any point quadrature can reach.
_R_FLOOR = 1e-300


def _radial_factors(r: np.ndarray, sign: float, omega: float):
    """G, G', G'' for G(r) = (e^{z r} - 1)/(omega^2 r), z = i*sign*omega."""
    shape = np.shape(r)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = 1j * sign * omega
    w = z * r
    G = np.empty(r.shape, dtype=complex)
    Gp = np.empty(r.shape, dtype=complex)
    Gpp = np.empty(r.shape, dtype=complex)

    small = omega * r < W_GUARD
    if np.any(small):
        ws = w[small]
        G[small] = (z / omega**2) * np.polynomial.polynomial.polyval(ws, _C0)
        Gp[small] = (z**2 / omega**2) * np.polynomial.polynomial.polyval(ws, _C1)
        Gpp[small] = (z**3 / omega**2) * np.polynomial.polynomial.polyval(ws, _C2)
    big = ~small
    if np.any(big):
        rb = r[big]
        wb = w[big]
        ew = np.exp(wb)
        G[big] = (ew - 1.0) / (omega**2 * rb)
        Gp[big] = ((wb - 1.0) * ew + 1.0) / (omega**2 * rb**2)
        Gpp[big] = ((wb * wb - 2.0 * wb + 2.0) * ew - 2.0) / (omega**2 * rb**3)
    return G.reshape(shape), Gp.reshape(shape), Gpp.reshape(shape)


@dataclass(frozen=True)
class FieldSample:
    """Exact solution and its derived fields at a batch of points.

    All arrays share the leading batch shape of the evaluation points:
    u and div_stress end in (2,), the matrices in (2, 2) with grad_u[i, j]
    = d u_i / d x_j.
    """

    u: np.ndarray
    grad_u: np.ndarray
    strain: np.ndarray
    stress: np.ndarray
    div_stress: np.ndarray


def exact_u(x: np.ndarray, p: ProblemParams) -> np.ndarray:
    """Exact displacement at points x of shape (..., 2); complex (..., 2)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    u = np.empty(x.shape, dtype=complex)
    for c, sign in ((0, +1.0), (1, -1.0)):
        u[..., c] = _radial_factors(r, sign, p.omega)[0]
    return u


def exact_fields(x: np.ndarray, p: ProblemParams) -> FieldSample:
    """Exact u with all first/second-derivative fields at points (..., 2)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    rs = np.maximum(r, _R_FLOOR)
    xh = x / rs[..., None]

    batch = x.shape[:-1]
    u = np.empty(batch + (2,), dtype=complex)
    grad = np.empty(batch + (2, 2), dtype=complex)
    div_stress = np.zeros(batch + (2,), dtype=complex)

    gp = np.empty(batch + (2,), dtype=complex)    # G'_c
    gpp = np.empty(batch + (2,), dtype=complex)   # G''_c
    for c, sign in ((0, +1.0), (1, -1.0)):
        G, Gp, Gpp = _radial_factors(r, sign, p.omega)
        u[..., c] = G
        gp[..., c] = Gp
        gpp[..., c] = Gpp
        grad[..., c, :] = Gp[..., None] * xh

    # div sigma(u) = mu Lap(u) + (lam + mu) grad(div u); with radial
    # components, Lap(u_c) = G_c'' + G_c'/r and
    # d^2 u_k / dx_i dx_k = G_k'' xh_i xh_k + (G_k'/r)(delta_ik - xh_i xh_k).
    lam, mu = p.lam, p.mu
    gp_over_r = gp / rs[..., None]
    for i in range(2):
        lap_i = gpp[..., i] + gp_over_r[..., i]
        grad_div_i = np.zeros(batch, dtype=complex)
        for k in range(2):
            delta = 1.0 if i == k else 0.0
            grad_div_i = grad_div_i + (
                gpp[..., k] * xh[..., i] * xh[..., k]
                + gp_over_r[..., k] * (delta - xh[..., i] * xh[..., k])
            )
        div_stress[..., i] = mu * lap_i + (lam + mu) * grad_div_i

    strain = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    div_u = np.trace(strain, axis1=-2, axis2=-1)
    stress = 2.0 * mu * strain + lam * div_u[..., None, None] * np.eye(2)
    return FieldSample(u=u, grad_u=grad, strain=strain, stress=stress,
                       div_stress=div_stress)


def source_f(x: np.ndarray, p: ProblemParams) -> np.ndarray:
    """Volume source f = -omega^2 rho u - div sigma(u) at points (..., 2)."""
    s = exact_fields(x, p)
    return -p.omega**2 * p.rho * s.u - s.div_stress


def boundary_g(x: np.ndarray, n: np.ndarray, p: ProblemParams) -> np.ndarray:
    """Boundary data g = i omega A u + sigma(u) n for outward unit normals n."""
    s = exact_fields(x, p)
    traction = np.einsum("...ij,...j->...i", s.stress, np.asarray(n, dtype=float))
    return 1j * p.omega * (s.u @ p.A.T) + traction


@dataclass(frozen=True)
class Solution:
    """Bundle of vectorized callables describing one exact solution.

    u(x) -> (..., 2); grad(x) -> (..., 2, 2); stress(x) -> (..., 2, 2);
    f(x) -> (..., 2); g(x, n) -> (..., 2).  Assembly and error routines
    are generic over this bundle so tests can substitute, e.g., a linear
    field with its matching data.
    """

    u: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    stress: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]


def manufactured(p: ProblemParams) -> Solution:
    """The radial test solution with its matching source and boundary data."""
    return Solution(
        u=lambda x: exact_u(x, p),
        grad=lambda x: exact_fields(x, p).grad_u,
        stress=lambda x: exact_fields(x, p).stress,
        f=lambda x: source_f(x, p),
        g=lambda x, n: boundary_g(x, n, p),
    )


def linear_solution(p: ProblemParams, B: np.ndarray, c: np.ndarray) -> Solution:
    """Affine field u(x) = c + B x with matching f and g; div sigma = 0."""
    B = np.asarray(B, dtype=complex)
    c = np.asarray(c, dtype=complex)
    strain = 0.5 * (B + B.T)
    stress_const = 2.0 * p.mu * strain + p.lam * np.trace(B) * np.eye(2)

    def u(x):
        x = np.asarray(x, dtype=float)
        return c + np.einsum("ij,...j->...i", B, x)

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(B, x.shape[:-1] + (2, 2)).copy()

    def stress(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(stress_const, x.shape[:-1] + (2, 2)).copy()

    def f(x):
        return -p.omega**2 * p.rho * u(x)

    def g(x, n):
        n = np.asarray(n, dtype=float)
        traction = np.einsum("ij,...j->...i", stress_const, n)
        return 1j * p.omega * (u(x) @ p.A.T) + traction

    return Solution(u=u, grad=grad, stress=stress, f=f, g=g)


def self_check(p: ProblemParams, samples: int, seed: int = 0,
               step: float = 1e-6) -> dict[str, float]:
    """Compare analytic derivatives against central finite differences.

    Draws `samples` seeded random points in the domain with r >= 0.05 and
    returns the max absolute deviation per derivative layer: grad_u
    against differences of u, div_stress against differences of stress.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 2))
    while pts.shape[0] < samples:
        cand = rng.uniform(-0.5, 0.5, size=(4 * samples, 2))
        cand = cand[np.linalg.norm(cand, axis=1) >= 0.05]
        pts = np.vstack([pts, cand])
    pts = pts[:samples]

    fields = exact_fields(pts, p)
    dev_grad = 0.0
    dev_div = 0.0
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        du = (exact_u(pts + e, p) - exact_u(pts - e, p)) / (2.0 * step)
        dev_grad = max(dev_grad, float(np.max(np.abs(du - fields.grad_u[..., :, j]))))
        dsig = (exact_fields(pts + e, p).stress - exact_fields(pts - e, p).stress) / (2.0 * step)
        # contributes the j-th column term of div sigma
        if j == 0:
            div_fd = dsig[..., :, 0]
        else:
            div_fd = div_fd + dsig[..., :, 1]
    dev_div = float(np.max(np.abs(div_fd - fields.div_stress)))
    return {"grad_u": dev_grad, "div_stress": dev_div}
