import itertools

import numpy as np
import pytest

from conftest import I2, X, Y, Z, pauli_oracle
from stabgraph.exceptions import CoefficientError, DimensionError, GroupError
from stabgraph.linalg import orthonormalize, subspace_equal
from stabgraph.ncgraph import build_ncgraph, is_operator_system
from stabgraph.pauli import (
    generate_group,
    parse_pauli_list,
    random_stabilizer_group,
    z_generators,
)
from stabgraph.stabilizer import (
    M0Coefficients,
    block_of,
    classical_stabilizer_check,
    expected_span_rank,
    invalid_m0_sample,
    independent_generators,
    theorem2_span,
    valid_m0_check,
    valid_m0_sample,
    vm0_characterize,
    z_form_matrices,
)


def oracle_matrix(coeffs: M0Coefficients) -> np.ndarray:
    """Expand coefficients through the literal 2x2 matrices."""
    d = 2**coeffs.n
    out = np.zeros((d, d), dtype=complex)
    for key, a in coeffs.alpha.items():
        out += pauli_oracle("".join("IZXY"[j] for j in key), a)
    return out


def z_group_oracle(n: int, s: int) -> list:
    return [
        pauli_oracle("".join("Z" if b else "I" for b in bits) + "I" * (n - s))
        for bits in itertools.product((0, 1), repeat=s)
    ]


def numeric_opsys(coeffs: M0Coefficients) -> bool:
    graph = build_ncgraph(z_group_oracle(coeffs.n, coeffs.s), oracle_matrix(coeffs))
    return is_operator_system(graph.space, 1e-9)[0]


def one_qubit(**alpha) -> M0Coefficients:
    return M0Coefficients(1, 1, {(int(k[1:]),): v for k, v in alpha.items()})


class TestCoefficients:
    def test_matrix_matches_oracle(self, rng):
        for seed in range(5):
            c = valid_m0_sample(2, 1, seed)
            assert np.allclose(c.to_matrix(), oracle_matrix(c))

    def test_y_sign(self):
        assert np.allclose(one_qubit(a3=1).to_matrix(), Y)

    def test_blocks(self):
        c = M0Coefficients(2, 1, {(0, 0): 1, (2, 1): 2, (3, 3): 1j, (1, 2): 0})
        assert c.blocks() == {(1,): {(2, 1): 2, (3, 3): 1j}}
        assert block_of((2, 0), 1) == (1,) and block_of((1, 3), 1) == (0,)

    def test_duplicate_keys_summed(self):
        c = M0Coefficients(1, 1, {(0,): 1, (2,): 1, "2": 2})
        assert c.alpha[(2,)] == 3

    @pytest.mark.parametrize("alpha", [{(4,): 1}, {(0, 0): 1}, {(-1,): 1}])
    def test_malformed_index(self, alpha):
        with pytest.raises(CoefficientError):
            M0Coefficients(1, 1, alpha)

    def test_s_zero_rejected(self):
        with pytest.raises(CoefficientError):
            M0Coefficients(1, 0, {(0,): 1})
        with pytest.raises(CoefficientError):
            valid_m0_sample(2, 0, 1)

    def test_json_round_trip(self):
        c = valid_m0_sample(3, 2, 11)
        back = M0Coefficients.from_json(c.to_json())
        assert back.alpha == c.alpha and (back.n, back.s) == (3, 2)
        assert "0 0 0" in c.to_json()["alpha"]

    def test_bad_json(self):
        with pytest.raises(CoefficientError):
            M0Coefficients.from_json({"n": 1, "s": 1, "alpha": {"0": "x"}})

    def test_from_letters(self):
        c = M0Coefficients.from_letters({"I": 1, "X": 2, "Y": -1j}, 1)
        assert c.alpha == {(0,): 1, (2,): 2, (3,): -1j}
        with pytest.raises(CoefficientError):
            M0Coefficients.from_letters({"IQ": 1}, 1)


class TestValidCheck:
    def test_real_block(self):
        assert valid_m0_check(one_qubit(a0=1, a2=3, a3=-5)) == (True, [])

    def test_commuting_term(self):
        ok, violations = valid_m0_check(one_qubit(a0=1, a1=0.5))
        assert not ok and violations[0]["condition"] == "commuting-term"

    def test_imaginary_block(self):
        assert valid_m0_check(one_qubit(a0=1, a2=1j, a3=1j))[0]

    def test_misaligned_block(self):
        ok, violations = valid_m0_check(one_qubit(a0=1, a2=1, a3=1j))
        assert not ok and violations[0]["condition"] == "block-not-phase-aligned"

    def test_identity_zero(self):
        ok, violations = valid_m0_check(one_qubit(a2=1))
        assert [v["condition"] for v in violations] == ["identity-coefficient-zero"]

    def test_all_violations_reported(self):
        ok, violations = valid_m0_check(one_qubit(a1=1, a2=1, a3=1j))
        assert len(violations) == 3

    def test_zero_head_tail_term_forbidden(self):
        # Z_2 commutes with Z_1 so it would survive every conjugation
        c = M0Coefficients(2, 1, {(0, 0): 1, (2, 0): 1, (0, 1): 1})
        assert not valid_m0_check(c)[0] and not numeric_opsys(c)

    def test_examples_match_numeric(self):
        for c in (
            one_qubit(a0=1, a2=3, a3=-5),
            one_qubit(a0=1, a1=0.5),
            one_qubit(a0=1, a2=1j, a3=1j),
            one_qubit(a0=1, a2=1, a3=1j),
        ):
            assert valid_m0_check(c)[0] == numeric_opsys(c)

    @pytest.mark.parametrize("n,s", [(1, 1), (2, 1), (2, 2)])
    def test_analytic_matches_numeric(self, n, s):
        # at least 200 cases in total across parametrizations
        for seed in range(70):
            for c in (valid_m0_sample(n, s, seed), invalid_m0_sample(n, s, seed)):
                assert valid_m0_check(c)[0] == numeric_opsys(c)

    def test_samples_deterministic(self):
        assert valid_m0_sample(3, 2, 5).alpha == valid_m0_sample(3, 2, 5).alpha
        assert invalid_m0_sample(3, 2, 5).alpha == invalid_m0_sample(3, 2, 5).alpha

    def test_samples_classified(self):
        for seed in range(50):
            assert valid_m0_check(valid_m0_sample(3, 2, seed))[0]
            assert not valid_m0_check(invalid_m0_sample(3, 2, seed))[0]


class TestCharacterize:
    def test_i_plus_x(self):
        assert subspace_equal(vm0_characterize(one_qubit(a0=1, a2=1)), orthonormalize([I2, X]))

    def test_glued_block(self):
        space = vm0_characterize(one_qubit(a0=1, a2=1, a3=2))
        assert space.rank == 2
        assert subspace_equal(space, orthonormalize([I2, X + 2 * Y]))

    def test_invalid_rejected(self):
        with pytest.raises(CoefficientError):
            vm0_characterize(one_qubit(a0=1, a1=1))

    @pytest.mark.parametrize("n,s", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)])
    def test_matches_numeric_span(self, n, s):
        for seed in range(10):
            c = valid_m0_sample(n, s, seed)
            graph = build_ncgraph(z_group_oracle(n, s), oracle_matrix(c))
            assert subspace_equal(vm0_characterize(c), graph.space)

    def test_z_form_matrices(self):
        assert len(z_form_matrices(3, 2)) == 4
        for a, b in zip(z_form_matrices(3, 2), z_group_oracle(3, 2)):
            assert np.allclose(a, b)


class TestSpan:
    @pytest.mark.parametrize("n,s,rank", [(1, 1, 3), (2, 1, 9), (2, 2, 13), (3, 1, 33), (3, 2, 49), (3, 3, 57)])
    def test_z_form_ranks(self, n, s, rank):
        result = theorem2_span(generate_group(z_generators(n, s), n))
        assert result.equal and result.lhs.rank == result.rhs.rank == rank == expected_span_rank(n, s)

    def test_z_group_basis(self):
        result = theorem2_span(generate_group(parse_pauli_list("Z")))
        assert subspace_equal(result.rhs, orthonormalize([I2, X, Y]))

    def test_x_group_basis(self):
        result = theorem2_span(generate_group(parse_pauli_list("X")))
        assert result.equal and result.lhs.rank == 3
        assert subspace_equal(result.lhs, orthonormalize([I2, Z, Y]))

    def test_conjugation_covariance(self, rng):
        for n in (2, 3):
            for s in range(1, n + 1):
                group = random_stabilizer_group(n, s, rng)
                a = theorem2_span(group)
                b = theorem2_span(generate_group(z_generators(n, s), n))
                assert a.equal and b.equal and a.lhs.rank == b.lhs.rank == expected_span_rank(n, s)

    def test_random_samples_add_nothing(self, rng):
        n, s = 2, 1
        result = theorem2_span(generate_group(z_generators(n, s), n))
        mats = list(result.lhs.basis)
        for seed in range(20):
            c = valid_m0_sample(n, s, seed)
            mats.extend(build_ncgraph(z_group_oracle(n, s), oracle_matrix(c)).space.basis)
        assert orthonormalize(mats).rank == result.lhs.rank

    def test_redundant_generators(self):
        gens = parse_pauli_list("ZZI,IZZ,ZIZ")
        assert len(independent_generators(gens)) == 2
        assert theorem2_span(generate_group(gens)).lhs.rank == expected_span_rank(3, 2)

    def test_rejects_minus_identity(self):
        with pytest.raises(GroupError):
            theorem2_span(generate_group(parse_pauli_list("Z,-Z")))

    def test_rejects_trivial(self):
        with pytest.raises(GroupError):
            theorem2_span(generate_group(parse_pauli_list("II")))

    def test_cap(self):
        with pytest.raises(DimensionError):
            theorem2_span(generate_group(z_generators(6, 1), 6))


class TestClassical:
    def test_z_fixture(self):
        ok, report = classical_stabilizer_check(generate_group(parse_pauli_list("Z")))
        by_name = {v.pauli: v for v in report}
        assert ok and len(report) == 4
        assert by_name["X"].compresses and by_name["X"].in_span and by_name["X"].scalar == 0
        assert by_name["Z"].compresses and by_name["Z"].scalar == pytest.approx(1)

    @pytest.mark.parametrize("gens,n", [("ZZ", 2), ("ZZI,IZZ", 3), ("XX,ZZ", 2)])
    def test_named(self, gens, n):
        ok, report = classical_stabilizer_check(generate_group(parse_pauli_list(gens)))
        assert ok and len(report) == 4**n

    def test_logical_not_compressed(self):
        # X_1X_2X_3 is a logical operator of the repetition code
        _, report = classical_stabilizer_check(generate_group(parse_pauli_list("ZZI,IZZ")))
        v = {r.pauli: r for r in report}["XXX"]
        assert not v.compresses and not v.in_span

    def test_random_groups(self, rng):
        for _ in range(10):
            group = random_stabilizer_group(3, int(rng.integers(1, 4)), rng)
            assert classical_stabilizer_check(group)[0]

    def test_jobs_same_report(self):
        group = generate_group(parse_pauli_list("ZZI,IZZ"))
        assert classical_stabilizer_check(group, jobs=4) == classical_stabilizer_check(group)

    def test_cap(self):
        with pytest.raises(DimensionError):
            classical_stabilizer_check(generate_group(z_generators(5, 1), 5))
