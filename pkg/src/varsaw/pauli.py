"""Pauli strings, Hamiltonians and qubit-wise commuting measurement groups.

Pauli strings are plain ``str`` labels over ``IXYZ`` with qubit 0 as the
leftmost character.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .pmf import Pmf

PAULI_LETTERS = frozenset("IXYZ")
MAX_DENSE_QUBITS = 14

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianFormatError(ValueError):
    """Raised for malformed Hamiltonian input data."""


def check_pauli(label: str, num_qubits: int | None = None) -> str:
    if not isinstance(label, str):
        raise TypeError(f"Pauli label must be str, got {type(label).__name__}")
    bad = set(label) - PAULI_LETTERS
    if bad:
        raise ValueError(f"invalid Pauli letters {sorted(bad)} in {label!r}")
    if num_qubits is not None and len(label) != num_qubits:
        raise ValueError(f"Pauli {label!r} has length {len(label)}, expected {num_qubits}")
    return label


def _check_pair(a: str, b: str) -> None:
    check_pauli(a)
    check_pauli(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {a!r} vs {b!r}")


def qubit_wise_commutes(a: str, b: str) -> bool:
    """True iff at every position the letters match or one of them is ``I``."""
    _check_pair(a, b)
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def covers(basis: str, term: str) -> bool:
    """True iff measuring in ``basis`` yields ``term``: every non-I letter of
    ``term`` appears at the same position of ``basis``."""
    _check_pair(basis, term)
    return all(t == "I" or t == b for b, t in zip(basis, term))


def support(label: str) -> tuple[int, ...]:
    return tuple(i for i, c in enumerate(label) if c != "I")


def weight(label: str) -> int:
    return sum(c != "I" for c in label)


def commuting_parents(target: str, alphabet: Iterable[str] = "XYZ") -> list[str]:
    """All strings over ``alphabet`` plus ``I`` that cover ``target``, excluding
    ``target`` itself, in lexicographic order.

    >>> len(commuting_parents("III", "XZ")), len(commuting_parents("IIZ", "XZ"))
    (26, 8)
    """
    letters = sorted(set(alphabet) | {"I"})
    check_pauli("".join(letters))
    if set(target) - set(letters):
        raise ValueError(f"{target!r} uses letters outside {letters}")
    choices = [letters if c == "I" else [c] for c in target]
    return sorted(s for s in map("".join, itertools.product(*choices)) if s != target)


@dataclass(frozen=True)
class PauliTerm:
    pauli: str
    coeff: float

    def __post_init__(self):
        check_pauli(self.pauli)
        object.__setattr__(self, "coeff", float(self.coeff))


class Hamiltonian:
    """Weighted sum of Pauli strings on ``num_qubits`` qubits.

    Duplicate strings are merged by summing coefficients; zero coefficients are
    kept since the term still has to be measured.
    """

    def __init__(self, num_qubits: int, terms: Iterable[PauliTerm | tuple[str, float]]):
        if int(num_qubits) != num_qubits or num_qubits < 1:
            raise HamiltonianFormatError(f"qubit count must be a positive integer, got {num_qubits!r}")
        self.num_qubits = int(num_qubits)
        merged: dict[str, float] = {}
        for term in terms:
            if not isinstance(term, PauliTerm):
                term = PauliTerm(*term)
            check_pauli(term.pauli, self.num_qubits)
            merged[term.pauli] = merged.get(term.pauli, 0.0) + term.coeff
        if not merged:
            raise HamiltonianFormatError("Hamiltonian has no terms")
        self.terms = tuple(PauliTerm(p, c) for p, c in merged.items())

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, Hamiltonian)
            and self.num_qubits == other.num_qubits
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"Hamiltonian(num_qubits={self.num_qubits}, terms={len(self.terms)})"

    @property
    def paulis(self) -> list[str]:
        return [t.pauli for t in self.terms]

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([t.coeff for t in self.terms])

    def to_dict(self) -> dict:
        return {
            "qubits": self.num_qubits,
            "terms": [{"pauli": t.pauli, "coeff": t.coeff} for t in self.terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hamiltonian":
        try:
            qubits = data["qubits"]
            raw = data["terms"]
            terms = [(t["pauli"], float(t["coeff"])) for t in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise HamiltonianFormatError(f"malformed Hamiltonian document: {exc!r}") from exc
        if isinstance(qubits, bool) or not isinstance(qubits, int):
            raise HamiltonianFormatError(f"'qubits' must be an integer, got {qubits!r}")
        try:
            return cls(qubits, terms)
        except (TypeError, ValueError) as exc:
            raise HamiltonianFormatError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Hamiltonian":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise HamiltonianFormatError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> "Hamiltonian":
        return cls.from_json(Path(path).read_text())

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**Q x 2**Q`` matrix (qubit 0 is the most significant factor)."""
        if self.num_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"dense matrix limited to {MAX_DENSE_QUBITS} qubits")
        dim = 2**self.num_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for term in self.terms:
            out += term.coeff * reduce(np.kron, (_PAULI_MATRICES[c] for c in term.pauli))
        return out

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.to_matrix())

    def ground_energy(self) -> float:
        return float(self.eigenvalues()[0])

    def spectral_range(self) -> float:
        ev = self.eigenvalues()
        return float(ev[-1] - ev[0])


def tfim(num_qubits: int, j: float = 1.0, h: float = 1.0) -> Hamiltonian:
    """Open-chain transverse-field Ising model ``-J sum Z_i Z_{i+1} - h sum X_i``."""
    q = num_qubits
    terms = []
    for i in range(q - 1):
        terms.append(("I" * i + "ZZ" + "I" * (q - i - 2), -j))
    for i in range(q):
        terms.append(("I" * i + "X" + "I" * (q - i - 1), -h))
    return Hamiltonian(q, terms)


def synthetic_term_count(num_qubits: int) -> int:
    return max(1, round(0.01 * num_qubits**4))


def random_hamiltonian(num_qubits: int, num_terms: int | None = None, seed=None) -> Hamiltonian:
    """Random Hamiltonian with i.i.d. uniform letters and uniform [-1, 1] weights.

    All-identity draws are rejected. ``num_terms`` defaults to
    ``max(1, round(0.01 * Q**4))``. Repeated strings are redrawn so the
    returned Hamiltonian has exactly ``num_terms`` distinct terms.
    """
    if num_terms is None:
        num_terms = synthetic_term_count(num_qubits)
    if num_terms > 4**num_qubits - 1:
        raise ValueError(f"cannot draw {num_terms} distinct terms on {num_qubits} qubits")
    rng = np.random.default_rng(seed)
    letters = np.array(list("IXYZ"))
    seen: dict[str, float] = {}
    while len(seen) < num_terms:
        label = "".join(letters[rng.integers(0, 4, size=num_qubits)])
        coeff = float(rng.uniform(-1.0, 1.0))
        if label.strip("I") and label not in seen:
            seen[label] = coeff
    return Hamiltonian(num_qubits, seen.items())


def parse_builtin(spec: str) -> Hamiltonian:
    """Build a Hamiltonian from ``tfim:Q:J:h`` or ``random:Q:P:seed``."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "tfim":
            q = int(parts[0])
            j = float(parts[1]) if len(parts) > 1 else 1.0
            h = float(parts[2]) if len(parts) > 2 else 1.0
            return tfim(q, j, h)
        if kind == "random":
            q = int(parts[0])
            p = int(parts[1]) if len(parts) > 1 else None
            seed = int(parts[2]) if len(parts) > 2 else 0
            return random_hamiltonian(q, p, seed)
    except (IndexError, ValueError) as exc:
        raise HamiltonianFormatError(f"bad builtin Hamiltonian spec {spec!r}: {exc}") from exc
    raise HamiltonianFormatError(f"unknown builtin Hamiltonian kind {kind!r}")


_LETTER_CODE = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_CODE_LETTER = "IXYZ"


def group_into_bases(hamiltonian: Hamiltonian) -> list[tuple[str, list[int]]]:
    """Greedy qubit-wise commuting grouping.

    Terms are visited by descending weight (ties keep input order). Each
    ungrouped term seeds a basis, which then absorbs every later ungrouped term
    that commutes qubit-wise with it, filling in ``I`` positions as it goes.

    Returns:
        ``(basis, term_indices)`` pairs; every term index occurs exactly once.
    """
    paulis = hamiltonian.paulis
    order = sorted(range(len(paulis)), key=lambda i: -weight(paulis[i]))
    codes = np.array([[_LETTER_CODE[c] for c in paulis[i]] for i in order], dtype=np.int8)
    free = np.ones(len(order), dtype=bool)
    groups = []
    for pos in range(len(order)):
        if not free[pos]:
            continue
        basis = codes[pos].copy()
        members = [order[pos]]
        free[pos] = False
        # A basis only fills in I positions, so a term that fails to commute
        # once never commutes later; scan forward for the next one that does.
        start = pos + 1
        while True:
            rest = codes[start:]
            ok = free[start:] & np.all((rest == 0) | (basis == 0) | (rest == basis), axis=1)
            hits = np.flatnonzero(ok)
            if not hits.size:
                break
            nxt = start + int(hits[0])
            basis = np.where(basis == 0, codes[nxt], basis)
            members.append(order[nxt])
            free[nxt] = False
            start = nxt + 1
        groups.append(("".join(_CODE_LETTER[c] for c in basis), members))
    return groups


def measured_qubits(basis: str) -> tuple[int, ...]:
    return support(basis)


def parity_signs(num_bits: int, positions: Sequence[int]) -> np.ndarray:
    """``(-1)**parity`` of the bits at ``positions`` for every index in ``range(2**num_bits)``."""
    idx = np.arange(2**num_bits)
    parity = np.zeros(2**num_bits, dtype=np.int64)
    for p in positions:
        parity ^= (idx >> (num_bits - 1 - p)) & 1
    return 1.0 - 2.0 * parity


def expectation_from_pmf(pmf: Pmf, term: PauliTerm | str, basis: str) -> float:
    """Expectation of ``term``'s Pauli string from a PMF measured in ``basis``.

    ``pmf`` must be over the qubits measured by ``basis`` (its labels may be in
    any order). The coefficient of ``term`` is not applied.
    """
    pauli = term.pauli if isinstance(term, PauliTerm) else term
    if not covers(basis, pauli):
        raise ValueError(f"basis {basis!r} does not cover term {pauli!r}")
    if any(q not in pmf.labels for q in support(pauli)):
        raise ValueError(f"PMF over {pmf.labels} lacks qubits of {pauli!r}")
    positions = [pmf.labels.index(q) for q in support(pauli)]
    return float(pmf.probs @ parity_signs(pmf.num_qubits, positions))
