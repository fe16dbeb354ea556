import dataclasses

import numpy as np
import pytest

from tensiform import (Model, Node, LinearMember, assemble_D, build_branch_node_matrix,
                       null_space_analysis, solve_linear_fdm, SingularSystem,
                       minimize_constrained, SolveOptions)
from tensiform.model import CABLE, PowerLength
from tensiform import fixtures

# the 6x4 incidence matrix of the 4-cable / 2-strut benchmark
X_TENSEGRITY_C = np.array([
    [1, 0, -1, 0],
    [1, 0, 0, -1],
    [0, 1, -1, 0],
    [0, 1, 0, -1],
    [1, -1, 0, 0],
    [0, 0, 1, -1],
])

D_UNIFORM = np.array([
    [-1, -1, 1, 1],
    [-1, -1, 1, 1],
    [1, 1, -1, -1],
    [1, 1, -1, -1],
], dtype=float)

D_DOUBLED = np.array([
    [-3, -1, 2, 2],
    [-1, -3, 2, 2],
    [2, 2, -3, -1],
    [2, 2, -1, -3],
], dtype=float)


class TestBranchNodeMatrix:
    def test_x_tensegrity_matches_reference(self):
        C = build_branch_node_matrix(fixtures.make_x_tensegrity())
        assert np.array_equal(C, X_TENSEGRITY_C)

    def test_single_member(self):
        nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3))]
        model = Model(nodes=nodes, members=[LinearMember(0, (0, 1), CABLE,
                                                         functional=PowerLength(1.0))])
        assert np.array_equal(build_branch_node_matrix(model), [[1, -1]])

    def test_triangle_rows_sum_to_zero(self):
        nodes = [Node(i, np.array([i, 0.0, 0.0])) for i in range(3)]
        members = [LinearMember(k, e, CABLE, functional=PowerLength(1.0))
                   for k, e in enumerate([(0, 1), (1, 2), (2, 0)])]
        C = build_branch_node_matrix(Model(nodes=nodes, members=members))
        assert C.shape == (3, 3)
        assert np.array_equal(C.sum(axis=1), [0, 0, 0])

    def test_every_row_one_plus_one_minus(self):
        C = build_branch_node_matrix(fixtures.make_simplex())
        assert np.all((C == 1).sum(axis=1) == 1)
        assert np.all((C == -1).sum(axis=1) == 1)


class TestAssembleD:
    def test_uniform_force_densities(self):
        D, D_f = assemble_D(fixtures.make_x_tensegrity(), [1, 1, 1, 1, -1, -1])
        assert np.array_equal(D, D_UNIFORM)
        assert D_f.shape == (4, 0)

    def test_doubled_cable_densities(self):
        D, _ = assemble_D(fixtures.make_x_tensegrity(), [2, 2, 2, 2, -1, -1])
        assert np.array_equal(D, D_DOUBLED)

    def test_single_cable_one_end_fixed(self):
        nodes = [Node(0, np.zeros(3)), Node(1, np.ones(3), fixed=True)]
        model = Model(nodes=nodes, members=[LinearMember(0, (0, 1), CABLE,
                                                         functional=PowerLength(0.5))])
        D, D_f = assemble_D(model, [1.0])
        assert np.array_equal(D, [[-1.0]])
        assert np.array_equal(D_f, [[1.0]])

    def test_symmetry(self, rng):
        model = fixtures.make_net(5, 4)
        q = rng.uniform(0.1, 3.0, len(model.members))
        D, _ = assemble_D(model, q)
        assert np.array_equal(D, D.T)

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError):
            assemble_D(fixtures.make_x_tensegrity(), [1.0, 2.0])


class TestNullSpace:
    def test_uniform_proportion_has_nullity_three(self):
        report = null_space_analysis(D_UNIFORM)
        assert report.nullity == 3
        assert report.rank == 1
        # reference kernel vectors all lie in the computed span
        B = report.basis
        for vec in ([1, 1, 1, 1], [1, -1, 0, 0], [0, 0, 1, -1]):
            v = np.asarray(vec, dtype=float)
            v /= np.linalg.norm(v)
            assert np.linalg.norm(v - B @ (B.T @ v)) <= 1e-10

    def test_doubled_proportion_has_nullity_one(self):
        report = null_space_analysis(D_DOUBLED)
        assert report.nullity == 1
        uniform = np.full(4, 0.5)
        assert abs(abs(uniform @ report.basis[:, 0]) - 1.0) < 1e-12

    def test_identity_has_nullity_zero(self):
        report = null_space_analysis(np.eye(5))
        assert report.nullity == 0 and report.rank == 5

    def test_basis_orthonormal_and_in_kernel(self):
        report = null_space_analysis(D_UNIFORM)
        B = report.basis
        assert np.allclose(B.T @ B, np.eye(report.nullity), atol=1e-12)
        norm_D = np.linalg.norm(D_UNIFORM)
        for col in range(report.nullity):
            assert np.linalg.norm(D_UNIFORM @ B[:, col]) <= report.tol * norm_D


class TestSolveLinearFdm:
    def _star(self, q_values):
        nodes = [Node(0, np.array([1.0, 0, 0]), fixed=True),
                 Node(1, np.array([-1.0, 0, 0]), fixed=True),
                 Node(2, np.array([0, 1.0, 0]), fixed=True),
                 Node(3, np.array([0, -1.0, 0]), fixed=True),
                 Node(4, np.array([0.3, 0.2, 0.1]))]
        members = [LinearMember(i, (i, 4), CABLE, functional=PowerLength(q / 2, 2))
                   for i, q in enumerate(q_values)]
        return Model(nodes=nodes, members=members)

    def test_symmetric_star_centers(self):
        solution = solve_linear_fdm(self._star([1, 1, 1, 1]), [1, 1, 1, 1])
        assert np.allclose(solution.positions[4], 0.0, atol=1e-14)

    def test_unequal_density_matches_dense_oracle(self):
        q = np.array([2.0, 1.0, 1.0, 1.0])
        model = self._star(q)
        solution = solve_linear_fdm(model, q)
        # independent dense solve: the free node balances q-weighted anchors
        anchors = model.positions[:4]
        expected = (q[:, None] * anchors).sum(axis=0) / q.sum()
        assert np.allclose(solution.positions[4], expected, atol=1e-12)
        lengths = np.linalg.norm(anchors - solution.positions[4], axis=1)
        assert np.allclose(solution.tensions, q * lengths, atol=1e-12)

    def test_matches_constrained_minimizer_on_net(self, rng):
        model_plain = fixtures.make_net(5, 5)
        q = rng.uniform(0.5, 2.0, len(model_plain.members))
        members = [dataclasses.replace(m, functional=PowerLength(q[i] / 2, 2))
                   for i, m in enumerate(model_plain.members)]
        model = Model(nodes=model_plain.nodes, members=members)
        lin = solve_linear_fdm(model, q)
        state = minimize_constrained(model, SolveOptions(seed=11))
        assert state.converged
        diff = np.abs(model.full_positions(state.coords) - lin.positions).max()
        assert diff < 1e-6

    def test_no_fixed_nodes_refused_with_report(self):
        model = fixtures.make_x_tensegrity()
        with pytest.raises(SingularSystem) as err:
            solve_linear_fdm(model, [1, 1, 1, 1, -1, -1])
        assert err.value.report.nullity == 3

    def test_positive_densities_yield_positive_definite_systems(self, rng):
        for rows, cols in ((3, 3), (4, 6), (5, 4)):
            model = fixtures.make_net(rows, cols)
            q = rng.uniform(0.05, 5.0, len(model.members))
            D, _ = assemble_D(model, q)
            # -D is the grounded Laplacian; Cholesky must succeed
            np.linalg.cholesky(-D)

    def test_singular_interior_detected(self):
        # a free node connected only through zero force densities
        model = fixtures.make_net(3, 3)
        q = np.zeros(len(model.members))
        with pytest.raises(SingularSystem):
            solve_linear_fdm(model, q)

    def test_mixed_sign_densities_use_general_factorization(self):
        # one mildly negative q keeps D regular but not positive definite
        model = fixtures.make_net(3, 3)
        q = np.ones(len(model.members))
        q[0] = -0.05
        solution = solve_linear_fdm(model, q)
        D, D_f = assemble_D(model, q)
        fixed = np.flatnonzero(model.fixed_mask)
        free = np.flatnonzero(~model.fixed_mask)
        residual = D @ solution.positions[free] + D_f @ model.positions[fixed]
        assert np.abs(residual).max() <= 1e-12
