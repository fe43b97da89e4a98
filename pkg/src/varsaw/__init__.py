"""Measurement-error mitigation for variational eigensolvers.

Subset circuits are shared across the whole Hamiltonian (spatial reduction)
and global circuits are run only every ``k`` iterations (temporal sparsity).
"""

from .estimators import MeasurementPlanner, ReadoutMitigator, VQESolver
from .mitigation import LocalResult, bayesian_update, reconstruct, run_mitigated_group
from .pauli import (
    Hamiltonian,
    PauliTerm,
    commuting_parents,
    expectation_from_pmf,
    group_into_bases,
    qubit_wise_commutes,
    random_hamiltonian,
    tfim,
)
from .planner import (
    CostReport,
    MeasurementPlan,
    Subset,
    cost_report,
    jigsaw_plan,
    reduce_subsets,
    sliding_window_subsets,
    varsaw_plan,
)
from .pmf import Pmf
from .simulator import AnsatzSpec, Executor, NoiseModel, apply_readout_noise, build_state, ideal_pmf, sample_pmf
from .vqe import Problem, SparsityController, SpsaConfig, VqaTrace, evaluate_energy, run_vqa, spsa_step

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec",
    "CostReport",
    "Executor",
    "Hamiltonian",
    "LocalResult",
    "MeasurementPlan",
    "MeasurementPlanner",
    "NoiseModel",
    "PauliTerm",
    "Pmf",
    "Problem",
    "ReadoutMitigator",
    "SparsityController",
    "SpsaConfig",
    "Subset",
    "VQESolver",
    "VqaTrace",
    "apply_readout_noise",
    "bayesian_update",
    "build_state",
    "commuting_parents",
    "cost_report",
    "evaluate_energy",
    "expectation_from_pmf",
    "group_into_bases",
    "ideal_pmf",
    "jigsaw_plan",
    "qubit_wise_commutes",
    "random_hamiltonian",
    "reconstruct",
    "reduce_subsets",
    "run_mitigated_group",
    "run_vqa",
    "sample_pmf",
    "sliding_window_subsets",
    "spsa_step",
    "tfim",
    "varsaw_plan",
]
