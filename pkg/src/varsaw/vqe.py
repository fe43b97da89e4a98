"""VQE loop with SPSA tuning, per-iteration mitigation and sparse global executions.

Three execution modes are supported:

``baseline``
    one noisy global circuit per measurement group, no mitigation.
``jigsaw``
    a fresh global plus that group's own sliding-window subsets every
    iteration, reconstructed per group; subsets are never shared.
``varsaw``
    the reduced subset plan, shared across groups, with global circuits only
    on scheduled iterations. Between them each group's most recent mitigated
    PMF stands in for the global.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .mitigation import LocalResult, reconstruct, run_mitigated_group
from .pauli import Hamiltonian, expectation_from_pmf
from .planner import MeasurementPlan, sliding_window_subsets, varsaw_plan
from .pmf import Pmf
from .simulator import AnsatzSpec, Executor, NoiseModel, build_state, ideal_pmf

logger = logging.getLogger(__name__)

MODES = ("baseline", "jigsaw", "varsaw")
SPARSITY_POLICIES = ("adaptive", "none", "max")
# Initial angles are drawn uniformly from [-DEFAULT_INIT_SCALE, DEFAULT_INIT_SCALE].
DEFAULT_INIT_SCALE = 0.3
TRACE_HEADER = ("iter", "energy", "circuits_cum", "k", "global", "mode", "seed")


@dataclass(frozen=True)
class SpsaConfig:
    """SPSA gains ``a_t = a / (t+1+stability)**alpha`` and ``c_t = c / (t+1)**gamma``.

    With ``a=None`` the step scale is calibrated at the initial point so the
    first update moves each parameter by about ``target_step`` radians.
    """

    a: float | None = None
    c: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    max_iterations: int = 100
    seed: int = 0
    target_step: float = 0.4
    calibration_samples: int = 25
    stability: float = 30.0

    def __post_init__(self):
        if self.a is not None and self.a <= 0:
            raise ValueError("SPSA a must be > 0")
        if self.c <= 0:
            raise ValueError("SPSA c must be > 0")
        if not (0 < self.alpha <= 1 and 0 < self.gamma <= 1):
            raise ValueError("SPSA alpha and gamma must lie in (0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass(frozen=True)
class SpsaStep:
    params: np.ndarray
    f_plus: float
    f_minus: float
    ok: bool


def spsa_step(
    params: np.ndarray,
    objective: Callable[[np.ndarray], float],
    t: int,
    cfg: SpsaConfig,
    rng: np.random.Generator,
    a: float | None = None,
) -> SpsaStep:
    """One simultaneous-perturbation update using exactly two objective calls."""
    if t < 0:
        raise ValueError("iteration index must be >= 0")
    a = cfg.a if a is None else a
    if a is None:
        raise ValueError("SPSA step scale `a` is not set; calibrate first")
    params = np.asarray(params, dtype=float)
    delta = rng.choice((-1.0, 1.0), size=params.shape)
    a_t = a / (t + 1 + cfg.stability) ** cfg.alpha
    c_t = cfg.c / (t + 1) ** cfg.gamma
    f_plus = objective(params + c_t * delta)
    f_minus = objective(params - c_t * delta)
    if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
        logger.warning("non-finite objective at SPSA step %d; step skipped", t)
        return SpsaStep(params, f_plus, f_minus, False)
    grad = (f_plus - f_minus) / (2 * c_t) * delta
    return SpsaStep(params - a_t * grad, f_plus, f_minus, True)


def calibrate_spsa(
    params: np.ndarray,
    objective: Callable[[np.ndarray], float],
    cfg: SpsaConfig,
    rng: np.random.Generator,
) -> float:
    """Step scale ``a`` giving a first update of roughly ``cfg.target_step`` per parameter."""
    mags = []
    for _ in range(cfg.calibration_samples):
        delta = rng.choice((-1.0, 1.0), size=np.shape(params))
        diff = objective(params + cfg.c * delta) - objective(params - cfg.c * delta)
        mags.append(abs(diff) / (2 * cfg.c))
    mean = float(np.mean(mags)) if mags else 0.0
    if not math.isfinite(mean) or mean < 1e-12:
        mean = 1.0
    return cfg.target_step * (1 + cfg.stability) ** cfg.alpha / mean


@dataclass
class SparsityController:
    """Schedules global executions every ``k`` iterations and tunes ``k``."""

    k: int = 2
    k_min: int = 1
    k_max: int = 128
    policy: str = "adaptive"
    cached_priors: dict[int, Pmf] = field(default_factory=dict)
    last_global_iteration: int = 0

    def __post_init__(self):
        if self.policy not in SPARSITY_POLICIES:
            raise ValueError(f"sparsity policy must be one of {SPARSITY_POLICIES}")
        if self.policy == "none":
            self.k = 1
        elif self.policy == "max":
            self.k = self.k_max
        if not 1 <= self.k_min <= self.k <= self.k_max:
            raise ValueError(f"need 1 <= k_min <= k <= k_max, got {self.k_min}, {self.k}, {self.k_max}")

    def is_scheduled(self, iteration: int) -> bool:
        return iteration - self.last_global_iteration >= self.k


@dataclass
class EnergyResult:
    energy: float
    circuits: int
    pmfs: list[Pmf]


@dataclass
class Problem:
    """Everything fixed across iterations: Hamiltonian, plan and ansatz."""

    hamiltonian: Hamiltonian
    plan: MeasurementPlan
    ansatz: AnsatzSpec

    def __post_init__(self):
        if self.plan.num_qubits != self.hamiltonian.num_qubits:
            raise ValueError("plan and Hamiltonian qubit counts differ")
        if self.ansatz.num_qubits != self.hamiltonian.num_qubits:
            raise ValueError("ansatz and Hamiltonian qubit counts differ")
        self._group_subsets = [self.plan.compatible_subsets(b) for b in self.plan.global_bases]
        self._jigsaw_subsets = [
            sliding_window_subsets(b, self.plan.subset_size, self.plan.generator)
            for b in self.plan.global_bases
        ]

    @classmethod
    def build(cls, hamiltonian: Hamiltonian, ansatz: AnsatzSpec | None = None, subset_size: int = 2,
              generator: str = "sliding") -> "Problem":
        ansatz = ansatz or AnsatzSpec(hamiltonian.num_qubits)
        return cls(hamiltonian, varsaw_plan(hamiltonian, subset_size, generator), ansatz)

    def energy_from_pmfs(self, pmfs: Sequence[Pmf]) -> float:
        terms = self.hamiltonian.terms
        total = 0.0
        for basis, members, pmf in zip(self.plan.global_bases, self.plan.groups, pmfs):
            for i in members:
                total += terms[i].coeff * expectation_from_pmf(pmf, terms[i], basis)
        return total

    def exact_energy(self, params) -> float:
        """Noise-free energy of ``params`` from exact PMFs."""
        state = build_state(self.ansatz, params)
        return self.energy_from_pmfs([ideal_pmf(state, b) for b in self.plan.global_bases])


def evaluate_energy(
    problem: Problem,
    params,
    mode: str,
    executor: Executor,
    priors: dict[int, Pmf] | None = None,
    passes: int = 1,
) -> EnergyResult:
    """Energy estimate at ``params`` under ``mode``.

    For ``varsaw`` the global circuits are executed only when ``priors`` is
    None; otherwise each group is reconstructed from its prior and the (shared)
    subsets. ``priors`` is never modified.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    before = executor.executions
    executor.load(build_state(problem.ansatz, params))
    bases = problem.plan.global_bases
    if mode == "baseline":
        pmfs = [executor.run(b) for b in bases]
    elif mode == "jigsaw":
        pmfs = []
        for basis, subsets in zip(bases, problem._jigsaw_subsets):
            glob = executor.run(basis)
            locals_ = [LocalResult(s, executor.run_subset(s, shared=False)) for s in subsets]
            pmfs.append(reconstruct(glob, locals_, passes))
    else:
        pmfs = [
            run_mitigated_group(
                executor, basis, subsets, None if priors is None else priors[g], passes=passes
            )[0]
            for g, (basis, subsets) in enumerate(zip(bases, problem._group_subsets))
        ]
    return EnergyResult(problem.energy_from_pmfs(pmfs), executor.executions - before, pmfs)


def evaluate_both(
    problem: Problem, params, executor: Executor, priors: dict[int, Pmf], passes: int = 1
) -> tuple[EnergyResult, EnergyResult]:
    """VarSaw case (a) fresh globals + subsets and case (b) priors + the same subsets.

    Subsets run once and serve both cases.
    """
    before = executor.executions
    executor.load(build_state(problem.ansatz, params))
    fresh, cached = [], []
    for g, (basis, subsets) in enumerate(zip(problem.plan.global_bases, problem._group_subsets)):
        fresh.append(run_mitigated_group(executor, basis, subsets, None, passes=passes)[0])
        cached.append(run_mitigated_group(executor, basis, subsets, priors[g], passes=passes)[0])
    circuits = executor.executions - before
    return (
        EnergyResult(problem.energy_from_pmfs(fresh), circuits, fresh),
        EnergyResult(problem.energy_from_pmfs(cached), 0, cached),
    )


def temporal_controller_step(
    controller: SparsityController,
    iteration: int,
    with_global: EnergyResult,
    with_prior: EnergyResult,
) -> EnergyResult:
    """Hill-climb ``k`` on a scheduled iteration and return the adopted result.

    A strictly lower fresh-global energy halves ``k`` and adopts it; otherwise
    (ties included) ``k`` doubles and the prior-based result is kept. The fresh
    PMFs become the cached priors either way.
    """
    if not controller.is_scheduled(iteration):
        raise ValueError(f"iteration {iteration} is not a scheduled global iteration")
    if with_global.energy < with_prior.energy:
        controller.k = max(controller.k_min, controller.k // 2)
        adopted = with_global
    else:
        controller.k = min(controller.k_max, controller.k * 2)
        adopted = with_prior
    controller.cached_priors = dict(enumerate(with_global.pmfs))
    controller.last_global_iteration = iteration
    return adopted


def params_digest(params) -> str:
    return hashlib.sha256(np.asarray(params, dtype=float).tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    params_digest: str
    energy: float
    circuits: int
    circuits_cum: int
    k: int
    global_executed: bool
    mode: str
    step_ok: bool = True


@dataclass
class VqaTrace:
    mode: str
    seed: int
    records: list[IterationRecord] = field(default_factory=list)
    final_params: np.ndarray | None = None
    final_exact_energy: float | None = None

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def total_circuits(self) -> int:
        return self.records[-1].circuits_cum if self.records else 0

    @property
    def iterations_completed(self) -> int:
        return len(self.records) - 1

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy

    @property
    def best_energy(self) -> float:
        return float(self.energies.min())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in self.records:
            writer.writerow(
                [r.iteration, repr(float(r.energy)), r.circuits_cum, r.k, int(r.global_executed), r.mode, self.seed]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "final_energy": float(self.final_energy),
            "best_energy": self.best_energy,
            "final_exact_energy": self.final_exact_energy,
            "total_circuits": self.total_circuits,
            "iterations_completed": self.iterations_completed,
            "final_k": self.records[-1].k,
            "globals_executed": sum(r.global_executed for r in self.records),
        }

    def records_as_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.records]


def initial_params(ansatz: AnsatzSpec, rng: np.random.Generator, scale: float = DEFAULT_INIT_SCALE) -> np.ndarray:
    return rng.uniform(-scale, scale, size=ansatz.parameter_count)


def run_vqa(
    problem: Problem,
    mode: str = "varsaw",
    *,
    max_iterations: int | None = None,
    max_circuits: int | None = None,
    spsa: SpsaConfig | None = None,
    noise: NoiseModel | None = None,
    seed: int = 0,
    sparsity: str = "adaptive",
    k_init: int = 2,
    k_min: int = 1,
    k_max: int = 128,
    sim_mode: str = "analytic",
    shots: int = 8192,
    passes: int = 1,
    init_params: np.ndarray | None = None,
    init_scale: float = DEFAULT_INIT_SCALE,
    executor: Executor | None = None,
) -> VqaTrace:
    """Run VQE until the iteration or circuit budget is used up.

    Exactly one of ``max_iterations`` and ``max_circuits`` must be given.
    Iteration 0 is the initial evaluation (including SPSA calibration, when
    ``spsa.a`` is unset). Each later iteration is one SPSA step (two probe
    evaluations) followed by an evaluation at the new parameters, which is
    what the trace records. A circuit budget is checked between iterations,
    so the last iteration may overshoot it.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if (max_iterations is None) == (max_circuits is None):
        raise ValueError("set exactly one of max_iterations and max_circuits")
    spsa = spsa or SpsaConfig(seed=seed)
    noise = noise if noise is not None else NoiseModel()
    rng = np.random.default_rng(seed)
    if executor is None:
        executor = Executor(noise=noise, sim_mode=sim_mode, shots=shots, rng=np.random.default_rng([seed, 1]))
    controller = SparsityController(
        k=k_init, k_min=k_min, k_max=k_max, policy=sparsity if mode == "varsaw" else "none"
    )
    trace = VqaTrace(mode=mode, seed=seed)

    theta = initial_params(problem.ansatz, rng, init_scale) if init_params is None else np.array(init_params, float)
    if theta.size != problem.ansatz.parameter_count:
        raise ValueError("initial parameters do not match the ansatz")

    def objective(th, fresh: bool) -> float:
        priors = None if (mode != "varsaw" or fresh) else controller.cached_priors
        return evaluate_energy(problem, th, mode, executor, priors, passes).energy

    start = executor.executions
    res = evaluate_energy(problem, theta, mode, executor, None, passes)
    controller.cached_priors = dict(enumerate(res.pmfs))
    a = spsa.a
    if a is None:
        a = calibrate_spsa(theta, lambda th: objective(th, True), spsa, rng)
    circuits = executor.executions - start
    trace.records.append(
        IterationRecord(0, params_digest(theta), res.energy, circuits, circuits, controller.k, True, mode)
    )

    iteration = 0
    while True:
        if max_iterations is not None and iteration >= max_iterations:
            break
        if max_circuits is not None and trace.total_circuits >= max_circuits:
            break
        iteration += 1
        start = executor.executions
        scheduled = mode != "varsaw" or controller.is_scheduled(iteration)
        step = spsa_step(theta, lambda th: objective(th, scheduled), iteration - 1, spsa, rng, a)
        theta = step.params

        if mode != "varsaw":
            res = evaluate_energy(problem, theta, mode, executor, None, passes)
        elif not scheduled:
            res = evaluate_energy(problem, theta, mode, executor, controller.cached_priors, passes)
            controller.cached_priors = dict(enumerate(res.pmfs))
        elif controller.policy == "adaptive":
            fresh, cached = evaluate_both(problem, theta, executor, controller.cached_priors, passes)
            res = temporal_controller_step(controller, iteration, fresh, cached)
        else:
            res = evaluate_energy(problem, theta, mode, executor, None, passes)
            controller.cached_priors = dict(enumerate(res.pmfs))
            controller.last_global_iteration = iteration

        circuits = executor.executions - start
        trace.records.append(
            IterationRecord(
                iteration,
                params_digest(theta),
                res.energy,
                circuits,
                trace.total_circuits + circuits,
                controller.k,
                scheduled,
                mode,
                step.ok,
            )
        )

    trace.final_params = theta
    trace.final_exact_energy = problem.exact_energy(theta)
    return trace
