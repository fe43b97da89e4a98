"""Dense statevector simulation of the hardware-efficient ansatz plus readout noise."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .pauli import check_pauli, support
from .planner import Subset
from .pmf import Pmf

logger = logging.getLogger(__name__)

MAX_QUBITS = 20
ENTANGLEMENTS = ("full", "linear", "circular")
SIM_MODES = ("analytic", "sampled")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)
_BASIS_CHANGE = {"X": _H, "Y": _H @ _SDG}


class QubitLimitError(ValueError):
    """Raised when a circuit exceeds the dense simulator's qubit cap."""


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


@dataclass(frozen=True)
class AnsatzSpec:
    """Hardware-efficient RY/RZ ansatz with ``reps`` entangling blocks.

    Parameters are laid out layer by layer; within a layer the ``Q`` RY angles
    come first, then the ``Q`` RZ angles.
    """

    num_qubits: int
    reps: int = 2
    entanglement: str = "full"

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("ansatz needs at least one qubit")
        if self.num_qubits > MAX_QUBITS:
            raise QubitLimitError(f"{self.num_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")
        if self.reps < 0:
            raise ValueError("reps must be non-negative")
        if self.entanglement not in ENTANGLEMENTS:
            raise ValueError(f"entanglement must be one of {ENTANGLEMENTS}, got {self.entanglement!r}")

    @property
    def parameter_count(self) -> int:
        return 2 * self.num_qubits * (self.reps + 1)

    def cx_pairs(self) -> list[tuple[int, int]]:
        q = self.num_qubits
        if self.entanglement == "full":
            return [(i, j) for i in range(q) for j in range(i + 1, q)]
        pairs = [(i, i + 1) for i in range(q - 1)]
        if self.entanglement == "circular" and q > 2:
            pairs.append((q - 1, 0))
        return pairs


def apply_1q(state: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 gate to ``qubit`` of a state tensor with one axis per qubit."""
    out = np.tensordot(gate, state, axes=([1], [qubit]))
    return np.moveaxis(out, 0, qubit)


def apply_cx(state: np.ndarray, control: int, target: int) -> np.ndarray:
    out = state.copy()
    idx = [slice(None)] * state.ndim
    idx[control] = 1
    sub = out[tuple(idx)]
    t = target if target < control else target - 1
    out[tuple(idx)] = np.flip(sub, axis=t)
    return out


def build_state(spec: AnsatzSpec, params) -> np.ndarray:
    """Statevector (length ``2**Q``) of the ansatz at ``params``, starting from |0...0>."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size != spec.parameter_count:
        raise ValueError(f"expected {spec.parameter_count} parameters, got {params.size}")
    q = spec.num_qubits
    state = np.zeros((2,) * q, dtype=complex)
    state[(0,) * q] = 1.0
    layers = params.reshape(spec.reps + 1, 2, q)
    pairs = spec.cx_pairs()
    for layer, (ys, zs) in enumerate(layers):
        for i in range(q):
            state = apply_1q(state, rz(zs[i]) @ ry(ys[i]), i)
        if layer < spec.reps:
            for c, t in pairs:
                state = apply_cx(state, c, t)
    return state.reshape(-1)


def ideal_pmf(state: np.ndarray, basis: str) -> Pmf:
    """Exact outcome distribution of measuring the non-I qubits of ``basis``."""
    state = np.asarray(state, dtype=complex)
    q = int(np.log2(state.size))
    check_pauli(basis, q)
    t = state.reshape((2,) * q)
    for i, c in enumerate(basis):
        if c in _BASIS_CHANGE:
            t = apply_1q(t, _BASIS_CHANGE[c], i)
    probs = np.abs(t) ** 2
    measured = support(basis)
    unmeasured = tuple(i for i in range(q) if i not in measured)
    if unmeasured:
        probs = probs.sum(axis=unmeasured)
    probs = np.asarray(probs).reshape(-1)
    return Pmf(measured, probs / probs.sum())


@dataclass(frozen=True)
class NoiseModel:
    """Bit-flip readout noise with crosstalk growing with the number of
    simultaneously measured qubits.

    ``p01``/``p10`` are per-qubit probabilities of reading 1 given 0 and 0
    given 1, either scalars or one value per qubit.
    """

    p01: float | tuple[float, ...] = 0.04
    p10: float | tuple[float, ...] = 0.04
    chi: float = 0.26
    scale: float = 1.0

    def __post_init__(self):
        for name in ("p01", "p10"):
            val = getattr(self, name)
            arr = np.atleast_1d(np.asarray(val, dtype=float))
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"{name} must lie in [0, 1]")
            if not np.isscalar(val) and np.ndim(val):
                object.__setattr__(self, name, tuple(float(x) for x in arr))
        if self.chi < 0:
            raise ValueError("crosstalk chi must be >= 0")
        if self.scale < 0:
            raise ValueError("noise scale must be >= 0")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(scale=0.0)

    @property
    def is_noiseless(self) -> bool:
        return self.scale == 0 or (
            np.all(np.asarray(self.p01) == 0) and np.all(np.asarray(self.p10) == 0)
        )

    def _per_qubit(self, value, qubit: int) -> float:
        return float(value[qubit]) if isinstance(value, tuple) else float(value)

    def flip_rates(self, qubit: int, num_measured: int) -> tuple[float, float]:
        """Effective ``(e01, e10)`` for ``qubit`` measured alongside ``num_measured - 1`` others."""
        inflation = self.scale * (1.0 + self.chi * (num_measured - 1))
        e01 = min(max(inflation * self._per_qubit(self.p01, qubit), 0.0), 0.5)
        e10 = min(max(inflation * self._per_qubit(self.p10, qubit), 0.0), 0.5)
        return e01, e10


def confusion_matrix(e01: float, e10: float) -> np.ndarray:
    """Column-stochastic ``P(read | true)``."""
    return np.array([[1 - e01, e10], [e01, 1 - e10]])


def apply_readout_noise(pmf: Pmf, noise: NoiseModel) -> Pmf:
    m = pmf.num_qubits
    if m == 0 or noise.is_noiseless:
        return pmf
    t = pmf.tensor()
    for axis, qubit in enumerate(pmf.labels):
        t = apply_1q(t, confusion_matrix(*noise.flip_rates(qubit, m)), axis)
    probs = np.real(np.asarray(t)).reshape(-1)
    return Pmf(pmf.labels, probs / probs.sum())


def sample_pmf(pmf: Pmf, shots: int, seed=None) -> Pmf:
    """Empirical PMF of ``shots`` i.i.d. draws from ``pmf``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(shots, pmf.probs)
    return Pmf(pmf.labels, counts / shots)


@dataclass
class Executor:
    """Runs measurement circuits for one ansatz state and counts them.

    Every call to :meth:`run` is one circuit execution. Subset results are
    cached per state so a subset shared by several groups is executed once.
    """

    noise: NoiseModel = field(default_factory=NoiseModel)
    sim_mode: str = "analytic"
    shots: int = 8192
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    executions: int = 0

    def __post_init__(self):
        if self.sim_mode not in SIM_MODES:
            raise ValueError(f"sim_mode must be one of {SIM_MODES}, got {self.sim_mode!r}")
        self._state = None
        self._subset_cache: dict[Subset, Pmf] = {}

    def load(self, state: np.ndarray) -> None:
        self._state = np.asarray(state)
        self._subset_cache = {}

    @property
    def num_qubits(self) -> int:
        return int(np.log2(self._state.size))

    def run(self, basis: str) -> Pmf:
        if self._state is None:
            raise RuntimeError("no state loaded")
        self.executions += 1
        pmf = apply_readout_noise(ideal_pmf(self._state, basis), self.noise)
        if self.sim_mode == "sampled":
            pmf = sample_pmf(pmf, self.shots, self.rng)
        return pmf

    def run_subset(self, subset: Subset, shared: bool = True) -> Pmf:
        if shared and subset in self._subset_cache:
            return self._subset_cache[subset]
        pmf = self.run(subset.as_basis(self.num_qubits))
        if shared:
            self._subset_cache[subset] = pmf
        return pmf
