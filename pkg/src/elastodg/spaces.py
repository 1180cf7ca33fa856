"""Vector P1 spaces: fully discontinuous (DG) and vertex-continuous (FEM).

Local dofs are ordered (vertex 0 comp 0, vertex 0 comp 1, vertex 1 comp 0,
...), keeping the two components of each nodal value adjacent.  The DG
space owns 6 dofs per element with global index 6*element + local; the
conforming space shares 2 dofs per vertex.  A Field is a coefficient
vector over either space; all evaluation goes through barycentric hat
functions, so edge traces are one-dimensional restrictions of the same
basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .mesh import EdgeInfo, Mesh, geometry


@dataclass(frozen=True, eq=False)
class DgSpace:
    mesh: Mesh

    dofs_per_element = 6

    @property
    def ndofs(self) -> int:
        return 6 * self.mesh.num_elements

    def local_to_global(self, element: int, local: int) -> int:
        return 6 * element + local

    def element_dofs(self, element: int) -> np.ndarray:
        return np.arange(6 * element, 6 * element + 6)


@dataclass(frozen=True, eq=False)
class FemSpace:
    mesh: Mesh

    dofs_per_element = 6

    @property
    def ndofs(self) -> int:
        return 2 * self.mesh.vertices.shape[0]

    def local_to_global(self, element: int, local: int) -> int:
        return 2 * int(self.mesh.triangles[element, local // 2]) + local % 2

    def element_dofs(self, element: int) -> np.ndarray:
        tri = self.mesh.triangles[element]
        return (2 * tri[:, None] + np.arange(2)[None, :]).ravel()


Space = Union[DgSpace, FemSpace]


@dataclass
class DgField:
    """Complex coefficient vector over a DG or conforming P1 space."""

    space: Space
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.space.ndofs,):
            raise ValueError(
                f"coefficient length {self.coeffs.shape} does not match "
                f"space dof count {self.space.ndofs}")

    @property
    def mesh(self) -> Mesh:
        return self.space.mesh


def element_coeffs(field: DgField, element: int) -> np.ndarray:
    """Nodal values of the field on one element as a (3, 2) complex array."""
    return field.coeffs[field.space.element_dofs(element)].reshape(3, 2)


def all_element_coeffs(field: DgField) -> np.ndarray:
    """Nodal values on every element, shape (nt, 3, 2); vectorized gather."""
    mesh = field.mesh
    if isinstance(field.space, DgSpace):
        return field.coeffs.reshape(mesh.num_elements, 3, 2)
    per_vertex = field.coeffs.reshape(-1, 2)
    return per_vertex[mesh.triangles]


def eval_field(field: DgField, element: int, bary: np.ndarray) -> np.ndarray:
    """Field value at barycentric point(s) of one element.

    bary has shape (3,) or (nq, 3); returns (2,) or (nq, 2).
    """
    if not 0 <= element < field.mesh.num_elements:
        raise IndexError(f"element {element} out of range")
    bary = np.asarray(bary, dtype=float)
    return bary @ element_coeffs(field, element)


def element_gradient(field: DgField, element: int) -> np.ndarray:
    """Constant gradient matrix (du_i/dx_j) of the P1 field on one element."""
    _, grads = geometry(field.mesh)
    c = element_coeffs(field, element)          # (3, 2) nodal values
    return np.einsum("vc,vj->cj", c, grads[element])


def element_stress(field: DgField, element: int, lam: float, mu: float) -> np.ndarray:
    """Elementwise-constant stress sigma(v_h); its divergence vanishes."""
    g = element_gradient(field, element)
    strain = 0.5 * (g + g.T)
    return 2.0 * mu * strain + lam * np.trace(g) * np.eye(2)


def interpolate(fn: Callable[[np.ndarray], np.ndarray], space: Space) -> DgField:
    """Vertex interpolant of an analytic field onto the given space.

    fn maps points (..., 2) to complex values (..., 2); a non-vectorized
    callable is applied vertex by vertex.  Rejects non-finite values.
    """
    verts = space.mesh.vertices
    vals = np.asarray(fn(verts))
    if vals.shape != verts.shape:
        vals = np.array([fn(v) for v in verts])
    if not np.all(np.isfinite(vals)):
        raise ValueError("field is not finite at every vertex")
    vals = vals.astype(complex)
    if isinstance(space, FemSpace):
        return DgField(space, vals.ravel())
    return DgField(space, vals[space.mesh.triangles].ravel())


def fem_to_dg(field: DgField) -> DgField:
    """Embed a conforming field into the DG space (same pointwise values)."""
    if not isinstance(field.space, FemSpace):
        raise TypeError("expected a field over FemSpace")
    mesh = field.mesh
    per_vertex = field.coeffs.reshape(-1, 2)
    return DgField(DgSpace(mesh), per_vertex[mesh.triangles].ravel())


def jump_and_average_traces(field: DgField, edge: EdgeInfo, t: np.ndarray,
                            lam: float, mu: float):
    """([v], {v}, [sigma(v) n_e], {sigma(v) n_e}) at edge points t in [0,1].

    Displacement traces have shape (nq, 2); stress tractions are constant
    along the edge for P1 and returned as (2,) vectors.  On boundary
    edges jump and average coincide with the one-sided trace.
    """
    n = edge.normal
    vp = eval_field(field, edge.plus_element, edge.bary("plus", t))
    sp = element_stress(field, edge.plus_element, lam, mu) @ n
    if edge.minus_element is None:
        return vp, vp, sp, sp
    # Jump = plus trace minus minus trace; n points outward from plus.
    vm = eval_field(field, edge.minus_element, edge.bary("minus", t))
    sm = element_stress(field, edge.minus_element, lam, mu) @ n
    return vp - vm, 0.5 * (vp + vm), sp - sm, 0.5 * (sp + sm)
