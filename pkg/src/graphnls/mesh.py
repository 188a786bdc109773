"""P1 finite elements on a metric graph.

Each edge carries a uniform grid; endpoint nodes meeting at a vertex share a
single global degree of freedom, which encodes continuity across vertices.
Halflines are truncated at a finite length with a homogeneous Dirichlet
condition at the far end (bound states decay, so the truncation length is
the accuracy knob).  Kirchhoff vertex conditions are never imposed
strongly: they are the natural conditions of the assembled quadratic form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np
import scipy.sparse as sp

from .graphs import GraphError, MetricGraph

DEFAULT_TRUNCATION = 20.0


class MeshError(ValueError):
    """Raised for invalid meshing parameters or mesh/function mismatches."""


@dataclass(frozen=True)
class EdgeMesh:
    edge_id: str
    coords: np.ndarray      # nodal coordinates along the edge, starting at src
    dofs: np.ndarray        # global dof per node; == ndof marks a fixed zero
    spacing: float
    is_halfline: bool


@dataclass
class Mesh:
    """Glued per-edge grids with a global degree-of-freedom map."""

    graph: MetricGraph
    h: float
    edge_meshes: tuple[EdgeMesh, ...]
    vertex_dof: Mapping[str, int]
    ndof: int
    truncation: float

    _mass: Optional[sp.csr_matrix] = field(default=None, repr=False)
    _stiffness: Optional[sp.csr_matrix] = field(default=None, repr=False)
    _lumped: Optional[np.ndarray] = field(default=None, repr=False)

    def edge_mesh(self, edge_id: str) -> EdgeMesh:
        for em in self.edge_meshes:
            if em.edge_id == edge_id:
                return em
        raise MeshError(f"unknown edge {edge_id!r}")

    @property
    def vertex_dofs(self) -> np.ndarray:
        return np.array(sorted(self.vertex_dof.values()), dtype=int)

    @property
    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.vertex_dofs] = False
        return mask

    def _assemble(self) -> None:
        rows, cols, mvals, kvals = [], [], [], []
        for em in self.edge_meshes:
            h = em.spacing
            a, b = em.dofs[:-1], em.dofs[1:]
            for (i, j, mv, kv) in (
                (a, a, h / 3.0, 1.0 / h),
                (b, b, h / 3.0, 1.0 / h),
                (a, b, h / 6.0, -1.0 / h),
                (b, a, h / 6.0, -1.0 / h),
            ):
                keep = (i < self.ndof) & (j < self.ndof)
                rows.append(i[keep])
                cols.append(j[keep])
                mvals.append(np.full(keep.sum(), mv))
                kvals.append(np.full(keep.sum(), kv))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        shape = (self.ndof, self.ndof)
        self._mass = sp.coo_matrix((np.concatenate(mvals), (rows, cols)), shape=shape).tocsr()
        self._stiffness = sp.coo_matrix((np.concatenate(kvals), (rows, cols)), shape=shape).tocsr()
        self._lumped = np.asarray(self._mass.sum(axis=1)).ravel()

    @property
    def mass_matrix(self) -> sp.csr_matrix:
        if self._mass is None:
            self._assemble()
        return self._mass

    @property
    def stiffness_matrix(self) -> sp.csr_matrix:
        if self._stiffness is None:
            self._assemble()
        return self._stiffness

    @property
    def lumped_mass(self) -> np.ndarray:
        if self._lumped is None:
            self._assemble()
        return self._lumped


def build_mesh(
    g: MetricGraph,
    h: float,
    trunc: Union[float, str] = "auto",
    lambda_est: Optional[float] = None,
) -> Mesh:
    """Build a glued P1 mesh with target spacing ``h``.

    ``trunc`` is the halfline truncation length; "auto" selects
    max(20, 8/sqrt(lambda_est)) so that exp(-sqrt(lambda) x) tails are
    negligible at the far end.
    """
    if h <= 0:
        raise MeshError("mesh spacing must be positive")
    ell = g.shortest_bounded_length
    if ell is not None and h >= ell / 2.0:
        raise MeshError(
            f"mesh too coarse: h={h} but the shortest bounded edge has length {ell}"
        )
    if trunc == "auto":
        lam = lambda_est if lambda_est else 0.16
        L = max(DEFAULT_TRUNCATION, 8.0 / math.sqrt(lam))
    else:
        L = float(trunc)
        if L <= 0:
            raise MeshError("truncation length must be positive")
        if L < 10 * h:
            raise MeshError(f"truncation length {L} shorter than 10 h = {10 * h}")

    vertex_dof = {v: i for i, v in enumerate(g.vertices)}
    next_dof = len(g.vertices)
    edge_meshes = []
    for e in g.edges:
        length = L if e.is_halfline else e.length
        n_elem = max(2, math.ceil(length / h - 1e-12))
        he = length / n_elem
        coords = np.linspace(0.0, length, n_elem + 1)
        dofs = np.empty(n_elem + 1, dtype=int)
        dofs[0] = vertex_dof[e.src]
        dofs[1:-1] = np.arange(next_dof, next_dof + n_elem - 1)
        next_dof += n_elem - 1
        if e.is_halfline:
            dofs[-1] = -1  # fixed later to ndof (homogeneous Dirichlet)
        else:
            dofs[-1] = vertex_dof[e.dst]
        edge_meshes.append(EdgeMesh(e.id, coords, dofs, he, e.is_halfline))
    ndof = next_dof
    fixed = []
    for em in edge_meshes:
        d = em.dofs
        d[d == -1] = ndof
    return Mesh(
        graph=g,
        h=h,
        edge_meshes=tuple(edge_meshes),
        vertex_dof=vertex_dof,
        ndof=ndof,
        truncation=L,
    )


@dataclass
class GraphFunction:
    """Nodal values of a continuous function on the mesh, one per global DOF."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.mesh.ndof,):
            raise MeshError(
                f"expected {self.mesh.ndof} nodal values, got {self.values.shape}"
            )

    def copy(self) -> "GraphFunction":
        return GraphFunction(self.mesh, self.values.copy())

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def edge_values(self, edge_id: str) -> np.ndarray:
        """Nodal values along one edge, including the fixed zero at a
        truncated halfline end."""
        em = self.mesh.edge_mesh(edge_id)
        ext = np.append(self.values, 0.0)
        return ext[em.dofs]

    def to_dict(self) -> dict:
        return {
            "h": self.mesh.h,
            "truncation": self.mesh.truncation,
            "edges": {
                em.edge_id: {
                    "x": em.coords.tolist(),
                    "u": _values_to_list(self.edge_values(em.edge_id)),
                }
                for em in self.mesh.edge_meshes
            },
        }


def _values_to_list(v: np.ndarray):
    if np.iscomplexobj(v):
        return [[float(z.real), float(z.imag)] for z in v]
    return [float(x) for x in v]


def zero_function(mesh: Mesh, complex_valued: bool = False) -> GraphFunction:
    dtype = complex if complex_valued else float
    return GraphFunction(mesh, np.zeros(mesh.ndof, dtype=dtype))


def interpolate(mesh: Mesh, profiles: Mapping[str, Callable]) -> GraphFunction:
    """Nodal sampling of closed-form profiles placed on selected edges.

    ``profiles`` maps edge id to a callable of the edge coordinate.  Values
    are zero elsewhere; at shared vertices the last-listed edge wins, so
    profiles should agree (or vanish) at shared endpoints.
    """
    u = zero_function(mesh)
    ext = np.zeros(mesh.ndof + 1)
    for edge_id, f in profiles.items():
        em = mesh.edge_mesh(edge_id)
        ext[em.dofs] = f(em.coords)
    u.values[:] = ext[: mesh.ndof]
    return u


def place_profile(
    mesh: Mesh,
    edge_id: str,
    f: Callable,
    center: float,
    support_radius: Optional[float] = None,
) -> GraphFunction:
    """Place a profile ``f(x - center)`` on one edge, zero elsewhere.

    Raises if the stated support does not fit inside the edge.
    """
    em = mesh.edge_mesh(edge_id)
    length = em.coords[-1]
    if support_radius is not None:
        if center - support_radius < -1e-12 or center + support_radius > length + 1e-12:
            raise MeshError(
                f"profile support [{center - support_radius:.4g}, "
                f"{center + support_radius:.4g}] exceeds edge {edge_id!r} of length {length:.4g}"
            )
    return interpolate(mesh, {edge_id: lambda x: f(x - center)})


def argmax(u: GraphFunction) -> tuple[str, float, float]:
    """Location of the maximum of |u|: (edge id, coordinate, value).

    Ties break by edge input order, then by smallest coordinate.
    """
    best = None
    for em in u.mesh.edge_meshes:
        vals = np.abs(u.edge_values(em.edge_id))
        k = int(np.argmax(vals))
        if best is None or vals[k] > best[2]:
            best = (em.edge_id, float(em.coords[k]), float(vals[k]))
    if best is None or best[2] == 0.0:
        raise MeshError("argmax of the zero function is undefined")
    return best
