"""Probability mass functions over measured bitstrings.

A :class:`Pmf` stores a dense probability vector of length ``2**m`` over the
``m`` qubits in ``labels``. Bit ``i`` of a bitstring (counting from the left)
belongs to ``labels[i]``, so ``labels[0]`` is the most significant bit of the
vector index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

PROB_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class Pmf:
    """Distribution over bitstrings of the qubits in ``labels``."""

    labels: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self):
        labels = tuple(int(q) for q in self.labels)
        probs = np.asarray(self.probs, dtype=float)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate qubit labels: {labels}")
        if probs.shape != (2 ** len(labels),):
            raise ValueError(
                f"expected {2 ** len(labels)} probabilities for {len(labels)} qubits, got shape {probs.shape}"
            )
        if np.any(probs < -PROB_ATOL):
            raise ValueError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > PROB_ATOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, labels: Sequence[int], mapping: Mapping[str, float]) -> "Pmf":
        labels = tuple(labels)
        probs = np.zeros(2 ** len(labels))
        for bits, p in mapping.items():
            if len(bits) != len(labels) or set(bits) - {"0", "1"}:
                raise ValueError(f"bitstring {bits!r} does not match {len(labels)} qubits")
            probs[int(bits, 2) if bits else 0] += p
        return cls(labels, probs)

    @classmethod
    def point(cls, labels: Sequence[int], bits: str) -> "Pmf":
        return cls.from_dict(labels, {bits: 1.0})

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def as_dict(self, tol: float = 0.0) -> dict[str, float]:
        """Sparse view: bitstring -> probability for entries above ``tol``."""
        m = self.num_qubits
        return {
            format(i, f"0{m}b") if m else "": float(p)
            for i, p in enumerate(self.probs)
            if p > tol
        }

    def tensor(self) -> np.ndarray:
        """Probabilities reshaped to one axis per label."""
        return self.probs.reshape((2,) * self.num_qubits)

    def marginal(self, labels: Sequence[int]) -> "Pmf":
        """Marginal over ``labels`` (a subset of this PMF's labels, any order)."""
        labels = tuple(labels)
        try:
            axes = [self.labels.index(q) for q in labels]
        except ValueError:
            raise ValueError(f"labels {labels} not all in {self.labels}") from None
        others = tuple(i for i in range(self.num_qubits) if i not in axes)
        t = self.tensor().sum(axis=others) if others else self.tensor()
        # remaining axes are in ascending original order; reorder to `labels`
        kept = sorted(axes)
        t = np.transpose(t, [kept.index(a) for a in axes]) if labels else t
        return Pmf(labels, np.asarray(t).reshape(-1))

    def tv_distance(self, other: "Pmf") -> float:
        if self.labels != other.labels:
            other = other.marginal(self.labels) if set(other.labels) >= set(self.labels) else other
        if self.labels != other.labels:
            raise ValueError("PMFs are over different qubits")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def __repr__(self):
        return f"Pmf(labels={self.labels}, {self.as_dict(tol=1e-12)})"
