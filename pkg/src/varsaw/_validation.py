"""Input coercion shared by the estimators and the CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .pauli import Hamiltonian, HamiltonianFormatError, parse_builtin
from .pmf import Pmf

BUILTIN_PREFIXES = ("tfim:", "random:")


def check_hamiltonian(X) -> Hamiltonian:
    """Accept a Hamiltonian, its JSON dict, a builtin spec string or a file path.

    Raises:
        HamiltonianFormatError: malformed content.
        OSError: the path cannot be read.
    """
    if isinstance(X, Hamiltonian):
        return X
    if isinstance(X, Mapping):
        return Hamiltonian.from_dict(dict(X))
    if isinstance(X, str) and X.startswith(BUILTIN_PREFIXES):
        return parse_builtin(X)
    if isinstance(X, (str, Path)):
        return Hamiltonian.load(X)
    raise HamiltonianFormatError(f"cannot interpret {type(X).__name__} as a Hamiltonian")


def check_pmf(pmf) -> Pmf:
    if not isinstance(pmf, Pmf):
        raise TypeError(f"expected a Pmf, got {type(pmf).__name__}")
    return pmf


def check_choice(name: str, value, choices) -> None:
    if value not in choices:
        raise ValueError(f"{name} must be one of {tuple(choices)}, got {value!r}")
