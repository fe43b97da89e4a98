import itertools
import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_hamiltonian
from varsaw import Hamiltonian, PauliTerm, Pmf, commuting_parents, expectation_from_pmf, group_into_bases
from varsaw.pauli import (
    HamiltonianFormatError,
    covers,
    parse_builtin,
    qubit_wise_commutes,
    random_hamiltonian,
    synthetic_term_count,
    tfim,
)


def paulis(n):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n)


same_length_pair = st.integers(1, 6).flatmap(lambda n: st.tuples(paulis(n), paulis(n)))
same_length_triple = st.integers(1, 5).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n)))


class TestCommutation:
    @pytest.mark.parametrize(
        "a, b, expected",
        [("III", "XZY", True), ("IZZ", "ZZZ", True), ("XZZ", "ZZZ", False), ("XY", "XY", True)],
    )
    def test_examples(self, a, b, expected):
        assert qubit_wise_commutes(a, b) is expected

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            qubit_wise_commutes("XX", "XXX")

    def test_bad_letter(self):
        with pytest.raises(ValueError):
            qubit_wise_commutes("XA", "XX")

    @given(same_length_pair)
    def test_symmetric(self, pair):
        a, b = pair
        assert qubit_wise_commutes(a, b) == qubit_wise_commutes(b, a)

    @given(st.integers(1, 6).flatmap(paulis))
    def test_reflexive(self, a):
        assert qubit_wise_commutes(a, a)
        assert covers(a, a)


class TestCoverOrder:
    @given(same_length_pair)
    def test_antisymmetric(self, pair):
        a, b = pair
        if covers(a, b) and covers(b, a):
            assert a == b

    @given(same_length_triple)
    def test_transitive(self, triple):
        a, b, c = triple
        if covers(a, b) and covers(b, c):
            assert covers(a, c)

    @given(st.integers(1, 4).flatmap(paulis))
    def test_parents_are_strict_up_set(self, target):
        every = map("".join, itertools.product("IXYZ", repeat=len(target)))
        expected = sorted(s for s in every if s != target and covers(s, target))
        assert commuting_parents(target) == expected


class TestParentCensus:
    def test_three_qubit_counts(self):
        assert len(commuting_parents("III", "XZ")) == 26
        assert len(commuting_parents("IIZ", "XZ")) == 8
        assert len(commuting_parents("IZZ", "XZ")) == 2
        assert commuting_parents("ZZZ", "XZ") == []

    def test_izz_parents(self):
        assert commuting_parents("IZZ", "XZ") == ["XZZ", "ZZZ"]

    def test_histogram_matches_brute_force(self):
        strings = ["".join(s) for s in itertools.product("IXZ", repeat=3)]
        brute = Counter(sum(1 for s in strings if s != t and covers(s, t)) for t in strings)
        census = Counter(len(commuting_parents(t, "XZ")) for t in strings)
        assert census == brute
        # 3^(#I) - 1 parents for each string
        assert census == Counter({26: 1, 8: 6, 2: 12, 0: 8})

    def test_rejects_foreign_letters(self):
        with pytest.raises(ValueError):
            commuting_parents("IYZ", "XZ")


class TestHamiltonian:
    def test_duplicates_merge_and_zero_kept(self):
        h = Hamiltonian(2, [("ZZ", 0.5), ("XI", 0.0), ("ZZ", 0.25)])
        assert h.paulis == ["ZZ", "XI"]
        np.testing.assert_allclose(h.coeffs, [0.75, 0.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            Hamiltonian(2, [("ZZZ", 1.0)])
        with pytest.raises(ValueError):
            PauliTerm("ZQ", 1.0)
        with pytest.raises(HamiltonianFormatError):
            Hamiltonian(2, [])

    def test_json_round_trip(self, tmp_path, four_qubit_hamiltonian):
        path = tmp_path / "h.json"
        path.write_text(four_qubit_hamiltonian.to_json())
        assert Hamiltonian.load(path) == four_qubit_hamiltonian
        assert json.loads(path.read_text())["qubits"] == 4

    @pytest.mark.parametrize(
        "payload", [{"qubits": 2, "terms": []}, {"terms": [{"pauli": "Z", "coeff": 1}]}, {"qubits": 2, "terms": [{"pauli": "ZZ"}]}]
    )
    def test_malformed_json(self, payload):
        with pytest.raises(HamiltonianFormatError):
            Hamiltonian.from_dict(payload)

    def test_tfim_structure(self):
        h = tfim(5, j=1.0, h=0.5)
        assert len(h) == 4 + 5
        assert [b for b, _ in group_into_bases(h)] == ["ZZZZZ", "XXXXX"]

    def test_tfim_ground_energy_matches_dense_oracle(self):
        h = tfim(4)
        oracle = np.linalg.eigvalsh(dense_hamiltonian(h))[0]
        assert h.ground_energy() == pytest.approx(oracle, abs=1e-10)
        # open chain, J = h = 1
        assert h.ground_energy() == pytest.approx(-4.7587704831436355, abs=1e-10)

    def test_spectral_range(self):
        h = Hamiltonian(1, [("Z", 2.0)])
        assert h.spectral_range() == pytest.approx(4.0)

    def test_random_hamiltonian_deterministic(self):
        a = random_hamiltonian(6, 30, seed=3)
        assert a == random_hamiltonian(6, 30, seed=3)
        assert len(a) == 30
        assert all(set(p) != {"I"} for p in a.paulis)

    def test_synthetic_term_count(self):
        assert [synthetic_term_count(q) for q in (4, 8, 12, 20)] == [3, 41, 207, 1600]

    def test_parse_builtin(self):
        assert parse_builtin("tfim:3:1.0:2.0") == tfim(3, 1.0, 2.0)
        assert parse_builtin("random:4:10:7") == random_hamiltonian(4, 10, seed=7)
        with pytest.raises(HamiltonianFormatError):
            parse_builtin("tfim:x")


class TestGrouping:
    def test_zzz_family_single_group(self):
        h = Hamiltonian(3, [("ZZZ", 1.0), ("IZI", 1.0), ("IZZ", 1.0)])
        # members are listed in visit order (descending weight)
        assert group_into_bases(h) == [("ZZZ", [0, 2, 1])]

    def test_conflicting_pair(self):
        h = Hamiltonian(2, [("ZZ", 1.0), ("XX", 1.0)])
        assert [b for b, _ in group_into_bases(h)] == ["ZZ", "XX"]

    def test_fills_identity_positions(self):
        h = Hamiltonian(3, [("ZII", 1.0), ("IXI", 1.0), ("IIY", 1.0)])
        assert group_into_bases(h) == [("ZXY", [0, 1, 2])]

    def test_four_qubit_instance(self, four_qubit_hamiltonian):
        assert len(group_into_bases(four_qubit_hamiltonian)) == 7

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 5), st.integers(1, 12), st.integers(0, 10_000))
    def test_partition_and_commutation(self, q, p, seed):
        h = random_hamiltonian(q, min(p, 4**q - 1), seed=seed)
        groups = group_into_bases(h)
        indices = sorted(i for _, members in groups for i in members)
        assert indices == list(range(len(h)))
        terms = h.paulis
        assert largest_conflict_set(terms) <= len(groups) <= len(h)
        for basis, members in groups:
            for i in members:
                assert covers(basis, terms[i])
            for i, j in itertools.combinations(members, 2):
                assert qubit_wise_commutes(terms[i], terms[j])


def largest_conflict_set(terms):
    """Size of the largest set of pairwise non-commuting terms (brute force)."""
    for size in range(len(terms), 0, -1):
        for combo in itertools.combinations(terms, size):
            if all(not qubit_wise_commutes(a, b) for a, b in itertools.combinations(combo, 2)):
                return size
    return 0


class TestExpectation:
    bell = Pmf.from_dict((0, 1), {"00": 0.5, "11": 0.5})

    def test_examples(self):
        assert expectation_from_pmf(self.bell, "ZZ", "ZZ") == pytest.approx(1.0)
        assert expectation_from_pmf(Pmf.point((0, 1), "01"), "ZZ", "ZZ") == pytest.approx(-1.0)
        assert expectation_from_pmf(self.bell, "ZI", "ZZ") == pytest.approx(0.0)

    def test_uncovered_term(self):
        with pytest.raises(ValueError):
            expectation_from_pmf(self.bell, "XZ", "ZZ")

    def test_partial_basis_pmf(self):
        pmf = Pmf.from_dict((1, 3), {"01": 0.25, "11": 0.75})
        assert expectation_from_pmf(pmf, "IZII", "IZIZ") == pytest.approx(-0.5)
        assert expectation_from_pmf(pmf, "IIIZ", "IZIZ") == pytest.approx(-1.0)

    @given(st.integers(1, 4), st.integers(0, 1000))
    def test_bounded(self, q, seed):
        rng = np.random.default_rng(seed)
        pmf = Pmf(tuple(range(q)), rng.dirichlet(np.ones(2**q)))
        for term in map("".join, itertools.product("IZ", repeat=q)):
            assert -1 - 1e-12 <= expectation_from_pmf(pmf, term, "Z" * q) <= 1 + 1e-12
