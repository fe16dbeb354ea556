"""Original force density method: linear equilibrium solve and null-space diagnosis.

Given one force density q = n/L per member, the free-node coordinates solve
D x = -D_f x_f per axis, with D assembled from the signed incidence matrix.
The sign convention keeps the diagonal of D negative for all-positive q,
matching the equilibrium matrix convention this solver is tested against;
the solved coordinates are unchanged by the overall sign.

For self-equilibrium systems without fixed nodes the right-hand side
vanishes and only the kernel of D carries information, so the solver
refuses and hands back a null-space report instead of a meaningless zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model import Model


@dataclass
class NullSpaceReport:
    rank: int
    nullity: int
    basis: np.ndarray  # (n, nullity), orthonormal columns spanning ker(D)
    tol: float


class SingularSystem(Exception):
    """Linear solve refused; carries the null-space diagnosis of D."""

    def __init__(self, message: str, report: NullSpaceReport):
        super().__init__(message)
        self.report = report


@dataclass
class LinearSolution:
    """Coordinates solving the linear equilibrium, with recovered tensions."""

    free_coords: np.ndarray    # flat free-node coordinate vector
    positions: np.ndarray      # (N, 3) including fixed nodes
    lengths: np.ndarray        # per member
    tensions: np.ndarray       # per member, n_j = q_j * L_j
    force_densities: np.ndarray


def build_branch_node_matrix(model: Model) -> np.ndarray:
    """Signed incidence matrix: row j has +1 at the first endpoint, -1 at the second."""
    m = len(model.members)
    C = np.zeros((m, model.num_nodes), dtype=np.int64)
    for row, member in enumerate(model.members):
        i, j = member.endpoints
        C[row, i] = 1
        C[row, j] = -1
    return C


def assemble_D(model: Model, force_densities) -> tuple[np.ndarray, np.ndarray]:
    """Equilibrium matrix blocks (D, D_f) for the free/fixed node partition.

    Entries follow the negated-Laplacian convention: the diagonal carries
    -sum(q) over incident members and each off-diagonal carries +q of the
    connecting member.
    """
    q = np.asarray(force_densities, dtype=float)
    if q.shape != (len(model.members),):
        raise ValueError(f"expected {len(model.members)} force densities, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("force densities must be finite")

    C = build_branch_node_matrix(model).astype(float)
    laplacian = C.T @ (q[:, None] * C)
    D_full = -laplacian

    free = np.flatnonzero(~model.fixed_mask)
    fixed = np.flatnonzero(model.fixed_mask)
    D = D_full[np.ix_(free, free)]
    D_f = D_full[np.ix_(free, fixed)]
    return D, D_f


def null_space_analysis(D: np.ndarray, tol: float = 1e-10) -> NullSpaceReport:
    """Rank and orthonormal kernel basis via singular-value thresholding."""
    D = np.asarray(D, dtype=float)
    _, s, vt = np.linalg.svd(D)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0.0 else 0
    basis = vt[rank:].T.copy()
    return NullSpaceReport(rank=rank, nullity=D.shape[0] - rank, basis=basis, tol=tol)


def solve_linear_fdm(model: Model, force_densities, tol: float = 1e-10) -> LinearSolution:
    """Solve the per-axis linear equilibrium for the free-node coordinates.

    Raises SingularSystem (with a NullSpaceReport) when the model has no
    fixed nodes or D is singular to within tol.
    """
    D, D_f = assemble_D(model, force_densities)
    q = np.asarray(force_densities, dtype=float)

    if not np.any(model.fixed_mask):
        report = null_space_analysis(D, tol)
        raise SingularSystem(
            "no fixed nodes: the self-equilibrium system D x = 0 admits only "
            "kernel solutions; see the attached null-space report", report)

    report = null_space_analysis(D, tol)
    if report.nullity > 0:
        raise SingularSystem(
            f"equilibrium matrix is singular (rank {report.rank}, "
            f"nullity {report.nullity})", report)

    fixed = np.flatnonzero(model.fixed_mask)
    rhs = -D_f @ model.positions[fixed]  # (n_free, 3), one column per axis

    # One factorization shared by the three axis solves.
    if np.all(q > 0):
        factor = cho_factor(-D)  # -D is the positive definite connection Laplacian
        solution = -cho_solve(factor, rhs)
    else:
        solution = np.linalg.solve(D, rhs)

    dof = model.dof_map
    positions = model.positions.copy()
    positions[dof.free_nodes] = solution
    d = positions[model.edge_array[:, 1]] - positions[model.edge_array[:, 0]]
    lengths = np.linalg.norm(d, axis=1)
    return LinearSolution(
        free_coords=solution.reshape(-1),
        positions=positions,
        lengths=lengths,
        tensions=q * lengths,
        force_densities=q,
    )
