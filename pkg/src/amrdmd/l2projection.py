"""L2-projection of P1 fields between non-matching meshes.

The projection solves M u_proj = P u on the target mesh, where M is the
target mass matrix and P couples target and donor shape functions. P is
assembled by quadrature over target elements, optionally subdivided into
congruent sub-simplices; donor basis values at quadrature points come from
point location. In 1-d the sub-intervals are additionally aligned with
donor nodes, which makes the cross-mesh integrals exact for P1 data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import fem
from .errors import CoverageError, InvalidArgumentError, PointNotFoundError
from .fem import FeField, SparseSpd, cg_solve, reference_rule
from .mesh import SimplicialMesh, locate_points

DEFAULT_QUAD_DEGREE = 4
DEFAULT_SUB_SPLITS = 2


@dataclass
class ProjectionOperator:
    donor: SimplicialMesh
    target: SimplicialMesh
    M: SparseSpd                  # target mass matrix
    P: sp.csr_matrix              # (target nodes) x (donor nodes)
    quad_degree: int
    sub_splits: int

    def partition_defect(self) -> float:
        """max |P 1_donor - M 1_target|; both sides equal the integrals of
        the target shape functions, so this vanishes up to roundoff."""
        ones_d = np.ones(self.donor.n_nodes)
        ones_t = np.ones(self.target.n_nodes)
        return float(np.max(np.abs(self.P @ ones_d - self.M.dot(ones_t))))


def _subdivided_rule_1d(degree: int, cuts: np.ndarray, sub_splits: int):
    """Points/weights on [0, 1] composed of Gauss rules on each piece
    between consecutive `cuts`, each piece split into sub_splits parts."""
    base = reference_rule(1, degree)
    t = base.points[:, 1]
    w = base.weights
    edges = np.unique(np.concatenate([[0.0], cuts, [1.0]]))
    pts, wts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sub = np.linspace(lo, hi, sub_splits + 1)
        for a, b in zip(sub[:-1], sub[1:]):
            pts.append(a + (b - a) * t)
            wts.append((b - a) * w)
    return np.concatenate(pts), np.concatenate(wts)


def _subdivided_rule_2d(degree: int, sub_splits: int):
    """Rule on the reference triangle subdivided into sub_splits^2
    congruent subtriangles; returns barycentric points and weights that
    sum to the reference measure 1/2."""
    base = reference_rule(2, degree)
    s = max(1, sub_splits)

    def lattice(i, j):
        return np.array([1.0 - (i + j) / s, i / s, j / s])

    corners = []
    for j in range(s):
        for i in range(s - j):
            corners.append((lattice(i, j), lattice(i + 1, j), lattice(i, j + 1)))
            if i + j < s - 1:
                corners.append((lattice(i + 1, j), lattice(i + 1, j + 1),
                                lattice(i, j + 1)))
    pts, wts = [], []
    for (A, B, C) in corners:
        pts.append(base.points @ np.vstack([A, B, C]))
        wts.append(base.weights / (s * s))
    return np.vstack(pts), np.concatenate(wts)


def build_projection(donor: SimplicialMesh, target: SimplicialMesh,
                     quad_degree: int = DEFAULT_QUAD_DEGREE,
                     sub_splits: int = DEFAULT_SUB_SPLITS) -> ProjectionOperator:
    """Assemble the cross-mesh coupling P and the target mass matrix M."""
    if donor.dim != target.dim:
        raise InvalidArgumentError("donor and target dimensions differ")
    M = fem.assemble_mass(target)
    ref = 1.0 if target.dim == 1 else 0.5
    measures = target.element_measures()
    k = target.dim + 1

    rows, cols, vals = [], [], []
    chunk = 2048
    donor_coords = donor.nodes[:, 0] if donor.dim == 1 else None
    if donor.dim == 1:
        donor_coords = np.sort(donor_coords)
    if target.dim == 2:
        bary, wref = _subdivided_rule_2d(quad_degree, sub_splits)

    for start in range(0, target.n_elems, chunk):
        eids = np.arange(start, min(start + chunk, target.n_elems))
        corners = target.nodes[target.elements[eids]]     # (ne, k, dim)
        if target.dim == 1:
            pts_list, tb_list, w_list, owner = [], [], [], []
            for loc, e in enumerate(eids):
                x0, x1 = corners[loc, 0, 0], corners[loc, 1, 0]
                inside = donor_coords[(donor_coords > x0 + 1e-14)
                                      & (donor_coords < x1 - 1e-14)]
                cuts = (inside - x0) / (x1 - x0)
                t, w = _subdivided_rule_1d(quad_degree, cuts, sub_splits)
                pts_list.append(x0 + (x1 - x0) * t)
                tb_list.append(np.column_stack([1.0 - t, t]))
                w_list.append(w * measures[e] / ref)
                owner.append(np.full(t.size, loc))
            phys = np.concatenate(pts_list).reshape(-1, 1)
            tbary = np.vstack(tb_list)
            weights = np.concatenate(w_list)
            owner = np.concatenate(owner)
        else:
            nq = bary.shape[0]
            phys = np.einsum("eki,qk->eqi", corners, bary).reshape(-1, 2)
            tbary = np.tile(bary, (len(eids), 1))
            weights = (measures[eids, None] / ref * wref[None, :]).reshape(-1)
            owner = np.repeat(np.arange(len(eids)), nq)

        try:
            d_eids, d_bary = locate_points(donor, phys)
        except PointNotFoundError as exc:
            offending = getattr(exc, "points", phys)
            raise CoverageError(
                f"target quadrature points not covered by donor mesh: {exc}",
                points=offending) from exc

        t_nodes = target.elements[eids][owner]            # (npts, k)
        d_nodes = donor.elements[d_eids]                  # (npts, kd)
        contrib = (weights[:, None, None]
                   * tbary[:, :, None] * d_bary[:, None, :])
        rows.append(np.repeat(t_nodes, d_nodes.shape[1], axis=1).reshape(-1))
        cols.append(np.tile(d_nodes, (1, k)).reshape(-1))
        vals.append(contrib.reshape(-1))

    P = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(target.n_nodes, donor.n_nodes)).tocsr()
    return ProjectionOperator(donor=donor, target=target, M=M, P=P,
                              quad_degree=quad_degree, sub_splits=sub_splits)


def project(op: ProjectionOperator, u: FeField, tol: float = 1e-12) -> FeField:
    """Project a donor field onto the target mesh (solves M u_proj = P u)."""
    if u.mesh is not op.donor:
        raise InvalidArgumentError("field is not bound to the operator's donor mesh")
    rhs = op.P @ u.values
    sol = cg_solve(op.M, rhs, tol=tol)
    return FeField(mesh=op.target, values=sol, name=u.name)


def rank_check(op: ProjectionOperator) -> int:
    """Numerical rank of P via column-pivoted QR with relative threshold
    1e-10 on the diagonal of R."""
    dense = op.P.toarray()
    R = scipy.linalg.qr(dense, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > 1e-10 * diag[0]))
