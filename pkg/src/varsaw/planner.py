"""Measurement subsets, spatial reduction and per-iteration circuit costs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .pauli import Hamiltonian, check_pauli, group_into_bases

GENERATORS = ("sliding", "all")


@dataclass(frozen=True, order=True)
class Subset:
    """Partial measurement of ``qubits`` in the per-qubit ``bases`` letters."""

    qubits: tuple[int, ...]
    bases: str

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != len(self.bases):
            raise ValueError("one basis letter per measured qubit required")
        if not self.qubits:
            raise ValueError("a subset measures at least one qubit")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubits in subset {self.qubits}")
        if list(self.qubits) != sorted(self.qubits):
            raise ValueError(f"subset qubits must be ascending, got {self.qubits}")
        if set(self.bases) - set("XYZ"):
            raise ValueError(f"subset letters must be X/Y/Z, got {self.bases!r}")

    @property
    def pairs(self) -> frozenset[tuple[int, str]]:
        return frozenset(zip(self.qubits, self.bases))

    def __len__(self):
        return len(self.qubits)

    def dominated_by(self, other: "Subset") -> bool:
        return self.pairs <= other.pairs

    def as_basis(self, num_qubits: int) -> str:
        """Full-width measurement string with ``I`` on unmeasured qubits."""
        letters = ["I"] * num_qubits
        for q, b in zip(self.qubits, self.bases):
            letters[q] = b
        return "".join(letters)

    def compatible_with(self, basis: str) -> bool:
        """True if the letters agree wherever ``basis`` measures, and at least
        one qubit is shared."""
        if any(q >= len(basis) for q in self.qubits):
            return False
        letters = [basis[q] for q in self.qubits]
        return all(c in (b, "I") for c, b in zip(letters, self.bases)) and any(c != "I" for c in letters)

    def restricted_to(self, basis: str) -> "Subset":
        """The part of this subset on qubits that ``basis`` measures."""
        kept = [(q, b) for q, b in zip(self.qubits, self.bases) if basis[q] != "I"]
        return Subset(tuple(q for q, _ in kept), "".join(b for _, b in kept))

    def to_dict(self) -> dict:
        return {"qubits": list(self.qubits), "bases": self.bases}

    def __str__(self):
        return "{" + ",".join(f"{q}{b}" for q, b in zip(self.qubits, self.bases)) + "}"


def _windows(num_qubits: int, m: int, generator: str) -> Iterable[tuple[int, ...]]:
    if generator == "sliding":
        return (tuple(range(s, s + m)) for s in range(num_qubits - m + 1))
    if generator == "all":
        return itertools.combinations(range(num_qubits), m)
    raise ValueError(f"unknown subset generator {generator!r}, expected one of {GENERATORS}")


def sliding_window_subsets(basis: str, m: int, generator: str = "sliding") -> list[Subset]:
    """Subsets for one measurement string, one per window of ``m`` qubits.

    ``I`` letters inside a window are dropped and all-``I`` windows yield
    nothing. Duplicates are kept (``"XIZI"`` gives three subsets, two distinct).
    ``generator="all"`` uses every ``m``-combination instead of contiguous
    windows.
    """
    check_pauli(basis)
    if m < 1:
        raise ValueError(f"subset size must be >= 1, got {m}")
    if m > len(basis):
        raise ValueError(f"subset size {m} exceeds qubit count {len(basis)}")
    out = []
    for window in _windows(len(basis), m, generator):
        kept = tuple(q for q in window if basis[q] != "I")
        if kept:
            out.append(Subset(kept, "".join(basis[q] for q in kept)))
    return out


def jigsaw_plan(bases: Sequence[str], m: int, generator: str = "sliding") -> list[Subset]:
    """Concatenated per-basis subsets with no deduplication (JigSaw's cost)."""
    return [s for b in bases for s in sliding_window_subsets(b, m, generator)]


def _reduction_key(s: Subset):
    return (-len(s), s.qubits, s.bases)


def reduce_subsets(subsets: Iterable[Subset]) -> list[Subset]:
    """Drop every subset dominated by another one.

    Sorting by descending size means any dominator is visited before the
    subsets it dominates, so one sweep leaves exactly the distinct maximal
    subsets, in that sorted order.
    """
    kept: list[Subset] = []
    for s in sorted(set(subsets), key=_reduction_key):
        if not any(s.dominated_by(k) for k in kept):
            kept.append(s)
    return kept


@dataclass(frozen=True)
class MeasurementPlan:
    """Global measurement bases plus the reduced subset circuits."""

    num_qubits: int
    global_bases: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...]
    subsets: tuple[Subset, ...]
    subset_size: int
    generator: str = "sliding"

    def jigsaw_subsets(self) -> list[Subset]:
        return jigsaw_plan(self.global_bases, self.subset_size, self.generator)

    def compatible_subsets(self, basis: str) -> list[Subset]:
        """Plan subsets usable for ``basis``, in plan order.

        A subset whose restriction to the measured qubits of ``basis`` is
        dominated by another candidate's restriction adds nothing and is dropped.
        """
        by_restriction: dict[Subset, Subset] = {}
        for s in self.subsets:
            if s.compatible_with(basis):
                by_restriction.setdefault(s.restricted_to(basis), s)
        useful = set(reduce_subsets(by_restriction))
        return [s for r, s in by_restriction.items() if r in useful]

    def to_dict(self) -> dict:
        return {
            "qubits": self.num_qubits,
            "subset_size": self.subset_size,
            "generator": self.generator,
            "global_bases": [
                {"basis": b, "terms": list(g)} for b, g in zip(self.global_bases, self.groups)
            ],
            "subsets": [s.to_dict() for s in self.subsets],
        }


def varsaw_plan(
    hamiltonian: Hamiltonian, m: int = 2, generator: str = "sliding"
) -> MeasurementPlan:
    """Subset first, then reduce: windows are taken from every raw Hamiltonian
    term, and from every grouped basis so that each JigSaw window stays
    covered, before the domination sweep."""
    groups = group_into_bases(hamiltonian)
    bases = [b for b, _ in groups]
    raw = jigsaw_plan(hamiltonian.paulis, m, generator)
    subsets = reduce_subsets(raw + jigsaw_plan(bases, m, generator))
    return MeasurementPlan(
        num_qubits=hamiltonian.num_qubits,
        global_bases=tuple(bases),
        groups=tuple(tuple(g) for _, g in groups),
        subsets=tuple(subsets),
        subset_size=m,
        generator=generator,
    )


@dataclass(frozen=True)
class CostReport:
    """Circuits executed per VQA iteration under each scheme."""

    baseline_per_iter: int
    jigsaw_per_iter: int
    varsaw_subsets_per_iter: int
    varsaw_global_per_iter: int
    global_fraction: float = field(default=1.0)

    @property
    def varsaw_amortized(self) -> int:
        return self.varsaw_subsets_per_iter + self.varsaw_global_per_iter

    def to_dict(self) -> dict:
        return {
            "baseline_per_iter": self.baseline_per_iter,
            "jigsaw_per_iter": self.jigsaw_per_iter,
            "varsaw_subsets_per_iter": self.varsaw_subsets_per_iter,
            "varsaw_global_per_iter": self.varsaw_global_per_iter,
            "varsaw_amortized_per_iter": self.varsaw_amortized,
            "global_fraction": self.global_fraction,
        }


def cost_report(
    plan: MeasurementPlan, jigsaw_subset_count: int | None = None, global_fraction: float = 1.0
) -> CostReport:
    if not 0.0 <= global_fraction <= 1.0:
        raise ValueError(f"global_fraction must lie in [0, 1], got {global_fraction}")
    if jigsaw_subset_count is None:
        jigsaw_subset_count = len(plan.jigsaw_subsets())
    n_glob = len(plan.global_bases)
    return CostReport(
        baseline_per_iter=n_glob,
        jigsaw_per_iter=n_glob + jigsaw_subset_count,
        varsaw_subsets_per_iter=len(plan.subsets),
        varsaw_global_per_iter=round(global_fraction * n_glob),
        global_fraction=global_fraction,
    )
