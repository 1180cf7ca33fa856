"""Uniform triangulation of the unit square (-1/2, 1/2)^2 with edge topology.

Each of the n x n cells is split along its lower-left to upper-right
diagonal into two congruent isosceles triangles, so the mesh T_{1/n} has
2 n^2 elements with side lengths {1/n, 1/n, sqrt(2)/n} and, for even n,
a vertex at the origin.  Edge orientation follows a global labeling rule:
on an interior edge the "plus" element is the adjacent element with the
greater index, and the edge normal points outward from it.  Jumps are
plus-trace minus minus-trace everywhere, which makes every jump sign a
pure function of n.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class EdgeInfo:
    """One mesh edge with its orientation and trace data.

    ``endpoints`` is the canonical (min, max) vertex-index pair.  The 1D
    reference coordinate t in [0, 1] runs from the first endpoint to the
    second; ``plus_local``/``minus_local`` give the local vertex numbers
    of the two endpoints inside each adjacent element, which is the whole
    affine trace map for P1 elements.  ``minus_element`` is None on the
    boundary, where the single adjacent element is stored as plus.
    """

    endpoints: tuple[int, int]
    h_e: float
    normal: np.ndarray
    plus_element: int
    minus_element: Optional[int]
    plus_local: tuple[int, int]
    minus_local: Optional[tuple[int, int]]

    def bary(self, side: str, t: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of edge points t inside one element.

        side is "plus" or "minus"; returns shape (len(t), 3).
        """
        if side == "plus":
            la, lb = self.plus_local
        elif side == "minus":
            if self.minus_local is None:
                raise ValueError("boundary edge has no minus side")
            la, lb = self.minus_local
        else:
            raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.shape[0], 3))
        out[:, la] = 1.0 - t
        out[:, lb] = t
        return out


@dataclass(eq=False)
class Mesh:
    """Immutable-by-convention triangulation; do not mutate after build.

    Identity semantics (eq=False): meshes compare and hash by object
    identity, so they can key caches; equality of content is a test-side
    concern.
    """

    n: int
    vertices: np.ndarray          # ((n+1)^2, 2) float
    triangles: np.ndarray         # (2 n^2, 3) int, CCW
    interior_edges: list[EdgeInfo] = field(repr=False)
    boundary_edges: list[EdgeInfo] = field(repr=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def num_elements(self) -> int:
        return self.triangles.shape[0]


def _local_index(tri: np.ndarray, vertex: int) -> int:
    for k in range(3):
        if tri[k] == vertex:
            return k
    raise ValueError(f"vertex {vertex} not in triangle {tri}")


def _outward_normal(pts: np.ndarray, tri: np.ndarray, a: int, b: int) -> np.ndarray:
    # For a CCW triangle the outward normal of directed edge u -> w is the
    # clockwise rotation of (w - u).  Find the directed occurrence of {a, b}.
    for k in range(3):
        u, w = tri[k], tri[(k + 1) % 3]
        if (u == a and w == b) or (u == b and w == a):
            d = pts[w] - pts[u]
            n = np.array([d[1], -d[0]])
            return n / np.linalg.norm(n)
    raise ValueError("edge not part of triangle")


def build_uniform(n: int) -> Mesh:
    """Build T_{1/n}.

    Vertices are laid out row-major, index i*(n+1)+j at coordinates
    (-1/2 + j/n, -1/2 + i/n).  Cell (i, j) produces element 2*(i*n+j)
    (lower triangle LL-LR-UR) and 2*(i*n+j)+1 (upper triangle LL-UR-UL),
    both counter-clockwise.  Deterministic: equal n gives identical
    meshes field for field.
    """
    if n < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n}")

    side = np.linspace(-0.5, 0.5, n + 1)
    xx, yy = np.meshgrid(side, side, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            ll = i * (n + 1) + j
            lr = ll + 1
            ul = ll + (n + 1)
            ur = ul + 1
            c = 2 * (i * n + j)
            tris[c] = (ll, lr, ur)
            tris[c + 1] = (ll, ur, ul)

    # Edge discovery with a canonical (min, max) vertex-pair key.
    adjacency: dict[tuple[int, int], list[int]] = {}
    for e, tri in enumerate(tris):
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            key = (a, b) if a < b else (b, a)
            adjacency.setdefault(key, []).append(e)

    interior: list[EdgeInfo] = []
    boundary: list[EdgeInfo] = []
    for (a, b), elems in sorted(adjacency.items()):
        h_e = float(np.linalg.norm(vertices[b] - vertices[a]))
        if len(elems) == 2:
            minus, plus = sorted(elems)
            normal = _outward_normal(vertices, tris[plus], a, b)
            interior.append(EdgeInfo(
                endpoints=(a, b),
                h_e=h_e,
                normal=normal,
                plus_element=plus,
                minus_element=minus,
                plus_local=(_local_index(tris[plus], a), _local_index(tris[plus], b)),
                minus_local=(_local_index(tris[minus], a), _local_index(tris[minus], b)),
            ))
        elif len(elems) == 1:
            elem = elems[0]
            normal = _outward_normal(vertices, tris[elem], a, b)
            boundary.append(EdgeInfo(
                endpoints=(a, b),
                h_e=h_e,
                normal=normal,
                plus_element=elem,
                minus_element=None,
                plus_local=(_local_index(tris[elem], a), _local_index(tris[elem], b)),
                minus_local=None,
            ))
        else:
            raise RuntimeError(f"edge {(a, b)} shared by {len(elems)} elements")

    return Mesh(n=n, vertices=vertices, triangles=tris,
                interior_edges=interior, boundary_edges=boundary)


def jump_sign(edge: EdgeInfo, element: int) -> int:
    """+1 on the plus side, -1 on the minus side, +1 on boundary edges."""
    if element == edge.plus_element:
        return +1
    if edge.minus_element is not None and element == edge.minus_element:
        return -1
    raise ValueError(f"element {element} is not adjacent to edge {edge.endpoints}")


def signed_area(pts: np.ndarray, tri: np.ndarray) -> float:
    p0, p1, p2 = pts[tri[0]], pts[tri[1]], pts[tri[2]]
    d1, d2 = p1 - p0, p2 - p0
    return 0.5 * float(d1[0] * d2[1] - d1[1] * d2[0])


_GEOMETRY_CACHE: "weakref.WeakKeyDictionary[Mesh, tuple[np.ndarray, np.ndarray]]" = \
    weakref.WeakKeyDictionary()


def geometry(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Signed areas (nt,) and barycentric gradients (nt, 3, 2), vectorized.

    grads[e, i] is the constant gradient of hat function lambda_i on
    element e: ((y_{i+1} - y_{i+2}), (x_{i+2} - x_{i+1})) / (2 area).
    Cached per mesh object.
    """
    cached = _GEOMETRY_CACHE.get(mesh)
    if cached is not None:
        return cached
    pts = mesh.vertices[mesh.triangles]           # (nt, 3, 2)
    d1 = pts[:, 1] - pts[:, 0]
    d2 = pts[:, 2] - pts[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    grads = np.empty_like(pts)
    for i in range(3):
        nxt, prv = pts[:, (i + 1) % 3], pts[:, (i + 2) % 3]
        grads[:, i, 0] = nxt[:, 1] - prv[:, 1]
        grads[:, i, 1] = prv[:, 0] - nxt[:, 0]
    grads /= (2.0 * areas)[:, None, None]
    _GEOMETRY_CACHE[mesh] = (areas, grads)
    return areas, grads


def dump(mesh: Mesh, path: str) -> None:
    """Plain-text dump, one "v x y" line per vertex and "t i j k" per triangle."""
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g}\n")
        for tri in mesh.triangles:
            fh.write(f"t {tri[0]} {tri[1]} {tri[2]}\n")
