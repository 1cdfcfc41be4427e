import numpy as np
import pytest

import gramspec as gs

from conftest import random_companion

EX1_P1 = (-1.0 / 48.0) * np.array([[1, 0, 1], [0, -1, 0], [1, 0, 1]], dtype=float)
EX1_SUM = (-1.0 / 120.0) * np.array([[1, 0, -1], [0, 1, 0], [-1, 0, 11]], dtype=float)
EX1_PAIRS = {
    (0, 0): (-1.0 / 8.0) * np.ones((3, 3)),
    (0, 1): (1.0 / 12.0) * np.array([[2, 3, 5], [3, 4, 6], [5, 6, 8]], dtype=float),
    (0, 2): (-1.0 / 16.0) * np.array([[1, 2, 5], [2, 3, 6], [5, 6, 9]], dtype=float),
    (1, 1): (-1.0 / 4.0) * np.array([[1, 2, 4], [2, 4, 8], [4, 8, 16]], dtype=float),
    (1, 2): (1.0 / 20.0) * np.array([[2, 5, 13], [5, 12, 30], [13, 30, 72]], dtype=float),
    (2, 2): (-1.0 / 24.0) * np.array([[1, 3, 9], [3, 9, 27], [9, 27, 81]], dtype=float),
}


def bbt(cr):
    return np.outer(cr.b_c, cr.b_c)


class TestInfiniteSubgramians:
    def test_example_values(self, example1):
        _, cr, spec = example1
        sym = gs.infinite_subgramians(cr, spec).symmetrized()
        assert np.max(np.abs(sym.components[0] - EX1_P1)) < 1e-12
        assert np.max(np.abs(sym.total() - EX1_SUM)) < 1e-12

    def test_scalar_system(self):
        cr = gs.build_companion(gs.Polynomial([1.0, 1.0]))
        spec = gs.Spectrum.simple([-1.0])
        sym = gs.infinite_subgramians(cr, spec).symmetrized()
        assert abs(sym.total()[0, 0] - 0.5) < 1e-14

    def test_random_matches_oracle(self):
        rng = np.random.default_rng(101)
        _, cr, spec = random_companion(rng, 5)
        total = gs.infinite_subgramians(cr, spec).symmetrized().total().real
        reference = gs.solve_lyapunov_dense(cr.a_c, bbt(cr)).matrix
        assert np.linalg.norm(total - reference) <= 1e-8 * np.linalg.norm(reference)

    def test_solvability_enforced(self):
        cr = gs.build_companion(gs.poly_from_roots([1j, -1j]))
        with pytest.raises(gs.SolvabilityError):
            gs.infinite_subgramians(cr, gs.Spectrum.simple([1j, -1j]))

    def test_multiple_redirected(self, example5):
        _, cr, spec = example5
        with pytest.raises(gs.MultipleEigenvalueError, match="multiple"):
            gs.infinite_subgramians(cr, spec)


class TestPairSubgramians:
    def test_example_values(self, example1):
        _, cr, spec = example1
        sym = gs.infinite_pair_subgramians(cr, spec).symmetrized()
        for key, expected in EX1_PAIRS.items():
            assert np.max(np.abs(sym.components[key] - expected)) < 1e-12, key
            mirror = (key[1], key[0])
            assert np.max(np.abs(sym.components[mirror] - expected)) < 1e-12

    def test_scalar(self):
        cr = gs.build_companion(gs.Polynomial([1.0, 1.0]))
        sym = gs.infinite_pair_subgramians(cr, gs.Spectrum.simple([-1.0])).symmetrized()
        assert abs(sym.components[(0, 0)][0, 0] - 0.5) < 1e-14

    def test_row_sums_give_eigen_components(self, example1):
        _, cr, spec = example1
        eigen = gs.infinite_subgramians(cr, spec).symmetrized()
        pairs = gs.infinite_pair_subgramians(cr, spec).symmetrized()
        for i in range(3):
            row = sum(pairs.components[(i, j)] for j in range(3))
            assert np.max(np.abs(row - eigen.components[i])) < 1e-9

    def test_partition_consistency_random(self):
        rng = np.random.default_rng(103)
        _, cr, spec = random_companion(rng, 6)
        eigen = gs.infinite_subgramians(cr, spec)
        pairs = gs.infinite_pair_subgramians(cr, spec)
        for flavor in ("raw", "symmetrized"):
            e = eigen if flavor == "raw" else eigen.symmetrized()
            q = pairs if flavor == "raw" else pairs.symmetrized()
            scale = max(1.0, float(np.max(np.abs(e.total()))))
            for i in range(6):
                row = sum(q.components[(i, j)] for j in range(6))
                assert np.max(np.abs(row - e.components[i])) < 1e-9 * max(
                    1.0, np.max(np.abs(e.components[i]))
                )
            assert np.max(np.abs(q.total() - e.total())) < 1e-9 * scale


class TestFiniteSubgramians:
    def test_zero_horizon(self, example1):
        _, cr, spec = example1
        dec = gs.finite_subgramians(cr, spec, 0.0)
        assert np.max(np.abs(dec.total())) < 1e-10

    def test_example_against_rk4(self, example1):
        _, cr, spec = example1
        dec = gs.finite_subgramians(cr, spec, 1.0)
        rk4 = gs.integrate_lyapunov(cr.a_c, bbt(cr), np.zeros((3, 3)), 1.0, steps=10_000)
        rel = np.linalg.norm(dec.total().real - rk4.matrix) / np.linalg.norm(rk4.matrix)
        assert rel < 1e-6

    def test_stable_limit(self, mirrored_stable):
        _, cr, spec = mirrored_stable
        finite = gs.finite_subgramians(cr, spec, 20.0).total().real
        infinite = gs.infinite_subgramians(cr, spec).total().real
        assert np.max(np.abs(finite - infinite)) < 1e-8

    def test_differential_residual(self, example1):
        _, cr, spec = example1
        h = 1e-5
        q = bbt(cr)
        for t in (0.1, 0.5, 1.0):
            dec = gs.finite_subgramians(cr, spec, t)
            p = dec.total(t=t).real
            dpdt = (dec.total(t=t + h).real - dec.total(t=t - h).real) / (2 * h)
            defect = -dpdt + cr.a_c @ p + p @ cr.a_c.T + q
            assert np.max(np.abs(defect)) < 1e-5 * max(1.0, np.max(np.abs(p)))


class TestFinitePairSubgramians:
    def test_zero_horizon(self, example1):
        _, cr, spec = example1
        dec = gs.finite_pair_subgramians(cr, spec, 0.0)
        assert np.max(np.abs(dec.total())) < 1e-12

    def test_pair_grouping_matches_infinite_components(self, example1):
        # grouping by exponent lambda_i + lambda_j reproduces the infinite
        # pair components as the coefficients of (1 - e^{st})
        _, cr, spec = example1
        dec = gs.finite_pair_subgramians(cr, spec, 0.7)
        sym_inf = gs.infinite_pair_subgramians(cr, spec).symmetrized()
        groups = {}
        for (i, j), static in dec.static.symmetrized().components.items():
            rate = round(float((spec.values[i] + np.conj(spec.values[j])).real))
            groups[rate] = groups.get(rate, 0.0) + static
        expected_3 = sym_inf.components[(0, 1)] + sym_inf.components[(1, 0)]
        assert np.max(np.abs(groups[3] - expected_3)) < 1e-10

    def test_consistency_with_eigen_sum(self, example1):
        _, cr, spec = example1
        t = 0.5
        pair_total = gs.finite_pair_subgramians(cr, spec, t).total()
        eigen_total = gs.finite_subgramians(cr, spec, t).total()
        assert np.max(np.abs(pair_total - eigen_total)) < 1e-9


class TestHomogeneous:
    def test_reproduces_initial_condition(self, example1):
        _, cr, spec = example1
        rng = np.random.default_rng(107)
        s = rng.standard_normal((3, 3))
        p0 = gs.InitialCondition(0.5 * (s + s.T))
        eigen, pair = gs.homogeneous_decomposition(cr, spec, p0, 0.0)
        assert np.max(np.abs(sum(eigen.components.values()) - p0.matrix)) < 1e-9
        assert np.max(np.abs(sum(pair.components.values()) - p0.matrix)) < 1e-9

    def test_against_rk4(self, example1):
        _, cr, spec = example1
        p0 = gs.InitialCondition(np.eye(3))
        eigen, _ = gs.homogeneous_decomposition(cr, spec, p0, 0.1)
        rk4 = gs.integrate_lyapunov(cr.a_c, np.zeros((3, 3)), np.eye(3), 0.1, steps=10_000)
        total = sum(eigen.components.values()).real
        assert np.linalg.norm(total - rk4.matrix) <= 1e-6 * np.linalg.norm(rk4.matrix)

    def test_zero_initial_condition(self, example1):
        _, cr, spec = example1
        p0 = gs.InitialCondition(np.zeros((3, 3)))
        eigen, pair = gs.homogeneous_decomposition(cr, spec, p0, 0.3)
        assert np.max(np.abs(sum(eigen.components.values()))) == 0.0
        assert np.max(np.abs(sum(pair.components.values()))) == 0.0


class TestLifting:
    def test_companion_input_is_identity_lift(self, mirrored_stable):
        _, cr, spec = mirrored_stable
        gram = gs.infinite_subgramians(cr, spec)
        lifted = gs.lift_to_original(gram, cr.system())
        assert np.max(np.abs(lifted.total() - gram.total())) < 1e-10

    def test_single_input_two_paths_agree(self):
        rng = np.random.default_rng(109)
        _, cr, spec = random_companion(rng, 4)
        t = rng.standard_normal((4, 4)) + 2.0 * np.eye(4)
        sys = gs.LtiSystem(t @ cr.a_c @ np.linalg.inv(t), t @ cr.b_c)
        transform, _ = gs.to_companion(sys)
        gram = gs.infinite_subgramians(cr, spec)
        lifted = gs.lift_to_original(gram, sys).total().real
        direct = transform.t @ gram.total().real @ transform.t.T
        assert np.max(np.abs(lifted - direct)) <= 1e-9 * max(1.0, np.max(np.abs(direct)))

    def test_multi_input_matches_oracle(self):
        rng = np.random.default_rng(111)
        for _ in range(5):
            _, cr, spec = random_companion(rng, 4, separation=0.15)
            t = rng.standard_normal((4, 4)) + 2.0 * np.eye(4)
            a = t @ cr.a_c @ np.linalg.inv(t)
            b = rng.standard_normal((4, 2))
            sys = gs.LtiSystem(a, b)
            gram = gs.infinite_subgramians(cr, spec)
            lifted = gs.lift_to_original(gram, sys).symmetrized().total().real
            reference = gs.solve_lyapunov_dense(a, b @ b.T).matrix
            rel = np.linalg.norm(lifted - reference) / max(1.0, np.linalg.norm(reference))
            assert rel < 1e-7

    def test_polynomial_mismatch_rejected(self, example1, mirrored_stable):
        _, cr1, spec1 = example1
        _, cr2, _ = mirrored_stable
        gram = gs.infinite_subgramians(cr1, spec1)
        with pytest.raises(ValueError, match="polynomial"):
            gs.lift_to_original(gram, cr2.system())

    def test_rank_deficient_rejected(self, example1):
        _, cr, spec = example1
        gram = gs.infinite_subgramians(cr, spec)
        bad = gs.LtiSystem(cr.a_c, np.zeros(3))
        with pytest.raises(gs.ControllabilityError):
            gs.lift_to_original(gram, bad)


class TestMultipleEigenvalues:
    def test_simple_reduction(self, mirrored_stable):
        _, cr, spec = mirrored_stable
        dec = gs.multiple_eig_gramian(cr.a_c, cr.b_c, spec)
        simple = gs.infinite_subgramians(cr, spec)
        assert np.max(np.abs(dec.total(t=0.0) - simple.total())) < 1e-8

    def test_jordan_block_against_oracle(self):
        a = np.array([[-1.0, 1.0], [0.0, -1.0]])
        b = np.array([0.0, 1.0])
        spec = gs.Spectrum([-1.0], [2])
        chains = gs.JordanChainSet.from_modal_matrices(spec, np.eye(2), np.eye(2))
        dec = gs.multiple_eig_gramian(a, b, spec, chains=chains)
        reference = gs.solve_lyapunov_dense(a, np.outer(b, b)).matrix
        assert np.max(np.abs(dec.total(t=0.0).real - reference)) < 1e-8

    def test_example_exact_solution(self, example5):
        _, cr, spec = example5
        dec = gs.multiple_eig_gramian(cr.a_c, cr.b_c, spec)
        expected = np.array(
            [
                [-41, 0, 12, 0, -16],
                [0, -12, 0, 16, 0],
                [12, 0, -16, 0, 64],
                [0, 16, 0, -64, 0],
                [-16, 0, 64, 0, -1152],
            ],
            dtype=float,
        ) / 13824.0
        assert np.max(np.abs(dec.total(t=0.0).real - expected)) < 1e-10

    def test_example_symmetrized_components(self, example5):
        _, cr, spec = example5
        sym = gs.multiple_eig_gramian(cr.a_c, cr.b_c, spec).static.symmetrized()
        p1 = (1.0 / 108.0) * np.array(
            [[1, 0, 3, 0, 5], [0, -3, 0, -5, 0], [3, 0, 5, 0, 7], [0, -5, 0, -7, 0], [5, 0, 7, 0, 9]],
            dtype=float,
        )
        p2 = (1.0 / 13824.0) * np.array(
            [
                [-169, 0, -372, 0, -656],
                [0, 372, 0, 656, 0],
                [-372, 0, -656, 0, -832],
                [0, 656, 0, 832, 0],
                [-656, 0, -832, 0, -2304],
            ],
            dtype=float,
        )
        assert np.max(np.abs(sym.components[0] - p1)) < 1e-12
        assert np.max(np.abs(sym.components[1] - p2)) < 1e-12

    def test_finite_multiple_against_rk4(self, example5):
        _, cr, spec = example5
        dec = gs.multiple_eig_gramian(cr.a_c, cr.b_c, spec, t=0.5)
        rk4 = gs.integrate_lyapunov(cr.a_c, bbt(cr), np.zeros((5, 5)), 0.5, steps=20_000)
        rel = np.linalg.norm(dec.total().real - rk4.matrix) / max(1.0, np.linalg.norm(rk4.matrix))
        assert rel < 1e-7
        assert np.max(np.abs(dec.total(t=0.0))) < 1e-10

    def test_non_companion_needs_chains(self):
        a = np.array([[-1.0, 1.0], [0.0, -1.0]])
        with pytest.raises(ValueError, match="chains"):
            gs.multiple_eig_gramian(a, np.array([0.0, 1.0]), gs.Spectrum([-1.0], [2]))


class TestStructuralProperties:
    def test_zero_plaid_simple(self):
        # complex-eigenvalue components show the plaid on conjugate-merged
        # (real) matrices; real-eigenvalue components carry it individually
        rng = np.random.default_rng(113)
        for n in (3, 5, 7):
            _, cr, spec = random_companion(rng, n)
            merged = gs.infinite_subgramians(cr, spec).symmetrized().merged_real()
            for part in merged.components.values():
                odd, alt = gs.zero_plaid_defect(part)
                assert odd < 1e-10
                assert alt < 1e-10

    def test_zero_plaid_example(self, example1):
        _, cr, spec = example1
        odd, alt = gs.zero_plaid_defect(gs.infinite_subgramians(cr, spec).symmetrized().total())
        assert odd == 0.0 and alt < 1e-14

    def test_diagonal_pairs_positive_semidefinite(self):
        rng = np.random.default_rng(115)
        _, cr, spec = random_companion(rng, 6)
        pairs = gs.infinite_pair_subgramians(cr, spec).symmetrized()
        for i in range(6):
            part = pairs.components[(i, i)]
            eigvals = np.linalg.eigvalsh(part)
            assert eigvals.min() >= -1e-10 * max(1.0, np.max(np.abs(part)))

    def test_conjugate_realness_and_merging(self):
        rng = np.random.default_rng(117)
        _, cr, spec = random_companion(rng, 5)
        eigen = gs.infinite_subgramians(cr, spec)
        partner = spec.conjugate_partner()
        for i in range(5):
            j = int(partner[i])
            total = eigen.components[i] + (eigen.components[j] if j != i else 0.0)
            scale = max(1.0, np.max(np.abs(total)))
            assert np.max(np.abs(total.imag)) < 1e-9 * scale
        merged = eigen.merged_real()
        assert np.max(np.abs(sum(merged.components.values()) - eigen.total().real)) < 1e-9

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(119)
        for _ in range(10):
            n = int(rng.integers(2, 9))
            _, cr, spec = random_companion(rng, n)
            total = gs.infinite_subgramians(cr, spec).symmetrized().total().real
            reference = gs.solve_lyapunov_dense(cr.a_c, bbt(cr)).matrix
            assert np.linalg.norm(total - reference) <= 1e-8 * np.linalg.norm(reference)


def test_exponent_collisions_flagged(example1):
    _, _, spec = example1
    collisions = gs.exponent_collisions(spec)
    # lambda_1 + lambda_3 = 4 = lambda_2 + lambda_2
    assert (((0, 2), (1, 1)) in collisions) or (((1, 1), (0, 2)) in collisions)


def test_initial_condition_validation():
    with pytest.raises(ValueError, match="symmetric"):
        gs.InitialCondition(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="square"):
        gs.InitialCondition(np.ones((2, 3)))
