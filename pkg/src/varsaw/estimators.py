"""scikit-learn style front ends.

Each estimator keeps its constructor arguments untouched (so ``get_params`` /
``set_params`` / ``clone`` work) and stores results in trailing-underscore
attributes during ``fit``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_choice, check_hamiltonian, check_pmf
from .mitigation import LocalResult, reconstruct
from .planner import GENERATORS, cost_report, varsaw_plan
from .simulator import ENTANGLEMENTS, SIM_MODES, AnsatzSpec, NoiseModel
from .vqe import MODES, SPARSITY_POLICIES, Problem, SpsaConfig, run_vqa


class MeasurementPlanner(BaseEstimator):
    """Build the VarSaw measurement plan and cost comparison for a Hamiltonian.

    Attributes:
        plan_: the fitted :class:`~varsaw.planner.MeasurementPlan`.
        jigsaw_subsets_: un-reduced per-basis subsets.
        cost_report_: per-iteration circuit counts.
    """

    def __init__(self, subset_size=2, generator="sliding", global_fraction=0.01):
        self.subset_size = subset_size
        self.generator = generator
        self.global_fraction = global_fraction

    def fit(self, X, y=None):
        check_choice("generator", self.generator, GENERATORS)
        h = check_hamiltonian(X)
        self.plan_ = varsaw_plan(h, self.subset_size, self.generator)
        self.jigsaw_subsets_ = self.plan_.jigsaw_subsets()
        self.cost_report_ = cost_report(self.plan_, len(self.jigsaw_subsets_), self.global_fraction)
        self.n_qubits_ = h.num_qubits
        return self

    def transform(self, X=None):
        check_is_fitted(self, "plan_")
        if X is not None:
            return MeasurementPlanner(**self.get_params()).fit(X).plan_
        return self.plan_

    def fit_transform(self, X, y=None):
        return self.fit(X).plan_

    @property
    def reduction_factor_(self) -> float:
        check_is_fitted(self, "plan_")
        return len(self.jigsaw_subsets_) / max(1, len(self.plan_.subsets))


class ReadoutMitigator(TransformerMixin, BaseEstimator):
    """Bayesian reconstruction with a fitted global PMF as the prior.

    ``fit`` takes the global PMF, ``transform`` a list of
    :class:`~varsaw.mitigation.LocalResult` and returns the reconstructed PMF.
    """

    def __init__(self, passes=1):
        self.passes = passes

    def fit(self, X, y=None):
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        self.global_ = check_pmf(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "global_")
        locals_ = list(X)
        if not all(isinstance(loc, LocalResult) for loc in locals_):
            raise TypeError("transform expects LocalResult items")
        return reconstruct(self.global_, locals_, self.passes)

    def fit_transform(self, X, y=None, **fit_params):
        raise TypeError("fit on the global PMF, then transform the local results")


class VQESolver(BaseEstimator):
    """Variational eigensolver with optional readout mitigation.

    ``fit(hamiltonian)`` runs the VQE loop; ``predict`` returns the final
    energy estimate and ``score`` the negated noise-free energy of the final
    parameters (higher is better, as sklearn expects).
    """

    def __init__(
        self,
        mode="varsaw",
        reps=2,
        entanglement="full",
        subset_size=2,
        generator="sliding",
        sparsity="adaptive",
        k_init=2,
        k_min=1,
        k_max=128,
        p01=0.04,
        p10=0.04,
        chi=0.26,
        noise_scale=1.0,
        sim_mode="analytic",
        shots=8192,
        max_iterations=100,
        max_circuits=None,
        spsa_a=None,
        spsa_c=0.1,
        spsa_alpha=0.602,
        spsa_gamma=0.101,
        spsa_target_step=0.4,
        spsa_stability=30.0,
        init_scale=0.3,
        passes=1,
        seed=0,
    ):
        self.mode = mode
        self.reps = reps
        self.entanglement = entanglement
        self.subset_size = subset_size
        self.generator = generator
        self.sparsity = sparsity
        self.k_init = k_init
        self.k_min = k_min
        self.k_max = k_max
        self.p01 = p01
        self.p10 = p10
        self.chi = chi
        self.noise_scale = noise_scale
        self.sim_mode = sim_mode
        self.shots = shots
        self.max_iterations = max_iterations
        self.max_circuits = max_circuits
        self.spsa_a = spsa_a
        self.spsa_c = spsa_c
        self.spsa_alpha = spsa_alpha
        self.spsa_gamma = spsa_gamma
        self.spsa_target_step = spsa_target_step
        self.spsa_stability = spsa_stability
        self.init_scale = init_scale
        self.passes = passes
        self.seed = seed

    def _validate(self):
        check_choice("mode", self.mode, MODES)
        check_choice("entanglement", self.entanglement, ENTANGLEMENTS)
        check_choice("sparsity", self.sparsity, SPARSITY_POLICIES)
        check_choice("sim_mode", self.sim_mode, SIM_MODES)
        check_choice("generator", self.generator, GENERATORS)

    def build_problem(self, hamiltonian) -> Problem:
        h = check_hamiltonian(hamiltonian)
        ansatz = AnsatzSpec(h.num_qubits, self.reps, self.entanglement)
        return Problem.build(h, ansatz, self.subset_size, self.generator)

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.p01, self.p10, self.chi, self.noise_scale)

    def spsa_config(self) -> SpsaConfig:
        return SpsaConfig(
            a=self.spsa_a,
            c=self.spsa_c,
            alpha=self.spsa_alpha,
            gamma=self.spsa_gamma,
            seed=self.seed,
            target_step=self.spsa_target_step,
            stability=self.spsa_stability,
        )

    def fit(self, X, y=None):
        self._validate()
        self.problem_ = self.build_problem(X)
        budget = (
            {"max_circuits": self.max_circuits}
            if self.max_circuits is not None
            else {"max_iterations": self.max_iterations}
        )
        self.trace_ = run_vqa(
            self.problem_,
            self.mode,
            spsa=self.spsa_config(),
            noise=self.noise_model(),
            seed=self.seed,
            sparsity=self.sparsity,
            k_init=self.k_init,
            k_min=self.k_min,
            k_max=self.k_max,
            sim_mode=self.sim_mode,
            shots=self.shots,
            passes=self.passes,
            init_scale=self.init_scale,
            **budget,
        )
        self.params_ = np.asarray(self.trace_.final_params)
        self.energy_ = self.trace_.final_energy
        self.n_iter_ = self.trace_.iterations_completed
        return self

    def predict(self, X=None):
        check_is_fitted(self, "trace_")
        return self.energy_

    def score(self, X=None, y=None):
        check_is_fitted(self, "trace_")
        return -self.problem_.exact_energy(self.params_)
