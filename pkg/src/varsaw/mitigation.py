"""Bayesian reconstruction of a global PMF from subset (local) PMFs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .planner import Subset
from .pmf import Pmf
from .simulator import Executor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalResult:
    subset: Subset
    pmf: Pmf

    def __post_init__(self):
        if self.pmf.labels != self.subset.qubits:
            raise ValueError(
                f"local PMF labels {self.pmf.labels} do not match subset qubits {self.subset.qubits}"
            )


def bayesian_update(global_pmf: Pmf, local: LocalResult | Pmf) -> Pmf:
    """Rescale ``global_pmf`` so its marginal on the local qubits equals the local PMF.

    Each full bitstring ``x`` gets ``P_local(s) * P_global(x) / M(s)`` where
    ``s`` is ``x`` restricted to the local qubits and ``M`` the global marginal.
    Local mass on an ``s`` with ``M(s) == 0`` is spread uniformly over the
    bitstrings consistent with ``s``.
    """
    lpmf = local.pmf if isinstance(local, LocalResult) else local
    glabels = global_pmf.labels
    if not set(lpmf.labels) <= set(glabels):
        raise ValueError(f"local qubits {lpmf.labels} not contained in global qubits {glabels}")
    n, k = len(glabels), len(lpmf.labels)
    axes = [glabels.index(q) for q in lpmf.labels]
    rest = [i for i in range(n) if i not in axes]
    # move local axes to the front in local order
    g = np.transpose(global_pmf.tensor(), axes + rest).reshape(2**k, -1)
    marginal = g.sum(axis=1)
    target = lpmf.probs
    zero = marginal <= 0.0
    ratio = np.divide(target, marginal, out=np.zeros_like(target), where=~zero)
    out = g * ratio[:, None]
    fallback = zero & (target > 0)
    if fallback.any():
        out[fallback] = (target[fallback] / g.shape[1])[:, None]
    out = out.reshape((2,) * n)
    out = np.transpose(out, np.argsort(axes + rest)).reshape(-1)
    return Pmf(glabels, out / out.sum())


def _local_order(local: LocalResult):
    return (min(local.subset.qubits), local.subset.qubits, local.subset.bases)


def reconstruct(global_pmf: Pmf, locals_: Sequence[LocalResult], passes: int = 1) -> Pmf:
    """Sequential Bayesian updates over ``locals_`` sorted by lowest qubit."""
    ordered = sorted(locals_, key=_local_order)
    out = global_pmf
    for _ in range(passes):
        for local in ordered:
            out = bayesian_update(out, local)
    return out


def run_mitigated_group(
    executor: Executor,
    basis: str,
    subsets: Sequence[Subset],
    prior: Pmf | None = None,
    *,
    share_subsets: bool = True,
    passes: int = 1,
) -> tuple[Pmf, int]:
    """Mitigated PMF for one measurement group and the circuits this call executed.

    Subsets that agree with ``basis`` wherever it measures are executed (or
    taken from the executor's per-state cache when ``share_subsets``); local
    PMFs are marginalized onto the qubits ``basis`` measures. The global PMF is
    executed fresh unless ``prior`` is given.
    """
    before = executor.executions
    glob = executor.run(basis) if prior is None else prior
    locals_ = []
    for s in subsets:
        if s.compatible_with(basis):
            part = s.restricted_to(basis)
            locals_.append(LocalResult(part, executor.run_subset(s, shared=share_subsets).marginal(part.qubits)))
    if not locals_:
        logger.debug("no subset compatible with basis %s; global PMF left unmitigated", basis)
        return glob, executor.executions - before
    return reconstruct(glob, locals_, passes), executor.executions - before
