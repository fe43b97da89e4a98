import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from conftest import random_state
from varsaw import (
    Executor,
    LocalResult,
    NoiseModel,
    Pmf,
    ReadoutMitigator,
    Subset,
    apply_readout_noise,
    bayesian_update,
    ideal_pmf,
    reconstruct,
    run_mitigated_group,
    sliding_window_subsets,
)

logger = logging.getLogger(__name__)


def update_oracle(global_pmf: Pmf, local: Pmf) -> dict[str, float]:
    """Loop-over-bitstrings evaluation of the Bayesian update."""
    g = global_pmf.as_dict()
    n = len(global_pmf.labels)
    pos = [global_pmf.labels.index(q) for q in local.labels]
    restrict = lambda x: "".join(x[p] for p in pos)  # noqa: E731
    strings = ["".join(b) for b in itertools.product("01", repeat=n)]
    mass = {}
    for x in strings:
        mass[restrict(x)] = mass.get(restrict(x), 0.0) + g.get(x, 0.0)
    out = {}
    for x in strings:
        s = restrict(x)
        pl = local.as_dict().get(s, 0.0)
        if mass[s] > 0:
            out[x] = pl * g.get(x, 0.0) / mass[s]
        else:
            out[x] = pl / 2 ** (n - len(pos))
    return out


def kl(p: Pmf, q: Pmf) -> float:
    m = p.probs > 0
    return float(np.sum(p.probs[m] * np.log(p.probs[m] / q.probs[m])))


def random_local(rng, global_labels, sparse=False):
    k = int(rng.integers(1, len(global_labels) + 1))
    qubits = tuple(sorted(rng.choice(global_labels, size=k, replace=False).tolist()))
    probs = rng.dirichlet(np.ones(2**k))
    if sparse:
        probs[rng.random(2**k) < 0.5] = 0
        probs = probs / probs.sum() if probs.sum() > 0 else np.eye(2**k)[0]
    return LocalResult(Subset(qubits, "Z" * k), Pmf(qubits, probs))


def noisy_instance(seed):
    """Random state, basis, and readout noise; noiseless sliding-window locals."""
    rng = np.random.default_rng(seed)
    q = int(rng.integers(3, 6))
    psi = random_state(q, rng)
    basis = "".join(rng.choice(list("XYZ"), q))
    p = rng.uniform(0.01, 0.10)
    ideal = ideal_pmf(psi, basis)
    glob = apply_readout_noise(ideal, NoiseModel(p01=p, p10=p, chi=0.26))
    locals_ = [LocalResult(s, ideal_pmf(psi, s.as_basis(q))) for s in sliding_window_subsets(basis, 2)]
    return ideal, glob, locals_


class TestBayesianUpdate:
    def test_uniform_global(self):
        glob = Pmf((0, 1, 2), np.full(8, 1 / 8))
        local = LocalResult(Subset((0, 1), "ZZ"), Pmf.point((0, 1), "00"))
        out = bayesian_update(glob, local)
        assert out.as_dict(1e-15) == {"000": pytest.approx(0.5), "001": pytest.approx(0.5)}

    def test_zero_mass_fallback(self):
        glob = Pmf.point((0, 1, 2), "000")
        local = LocalResult(Subset((0, 1), "ZZ"), Pmf.point((0, 1), "11"))
        out = bayesian_update(glob, local)
        assert out.as_dict(1e-15) == {"110": pytest.approx(0.5), "111": pytest.approx(0.5)}

    def test_fixed_point(self, rng):
        glob = Pmf((0, 1, 2, 3), rng.dirichlet(np.ones(16)))
        local = LocalResult(Subset((1, 3), "ZZ"), glob.marginal((1, 3)))
        np.testing.assert_allclose(bayesian_update(glob, local).probs, glob.probs, atol=1e-15)

    def test_label_mismatch(self):
        glob = Pmf((0, 1), np.full(4, 0.25))
        with pytest.raises(ValueError):
            bayesian_update(glob, LocalResult(Subset((2,), "Z"), Pmf.point((2,), "0")))
        with pytest.raises(ValueError):
            LocalResult(Subset((0, 1), "ZZ"), Pmf.point((1, 0), "00"))

    def test_non_contiguous_global_labels(self, rng):
        glob = Pmf((1, 4, 6), rng.dirichlet(np.ones(8)))
        local = Pmf((4, 6), rng.dirichlet(np.ones(4)))
        out = bayesian_update(glob, LocalResult(Subset((4, 6), "ZZ"), local))
        assert out.labels == (1, 4, 6)
        np.testing.assert_allclose(out.marginal((4, 6)).probs, local.probs, atol=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 5), st.booleans(), st.integers(0, 100_000))
    def test_matches_oracle_and_marginal(self, q, sparse, seed):
        rng = np.random.default_rng(seed)
        probs = rng.dirichlet(np.ones(2**q))
        if sparse:
            probs[rng.random(2**q) < 0.6] = 0
            probs = probs / probs.sum() if probs.sum() > 0 else np.eye(2**q)[-1]
        glob = Pmf(tuple(range(q)), probs)
        local = random_local(rng, list(range(q)), sparse=sparse)
        out = bayesian_update(glob, local)
        expected = update_oracle(glob, local.pmf)
        np.testing.assert_allclose(out.probs, [expected[k] for k in sorted(expected)], atol=1e-12)
        np.testing.assert_allclose(out.marginal(local.subset.qubits).probs, local.pmf.probs, atol=1e-12)
        assert np.all(out.probs >= 0) and out.probs.sum() == pytest.approx(1.0, abs=1e-12)


class TestReconstruct:
    def test_empty_and_single(self, rng):
        glob = Pmf((0, 1, 2), rng.dirichlet(np.ones(8)))
        assert reconstruct(glob, []) is glob
        local = random_local(rng, [0, 1, 2])
        np.testing.assert_array_equal(reconstruct(glob, [local]).probs, bayesian_update(glob, local).probs)

    def test_order_is_by_lowest_qubit(self, rng):
        glob = Pmf((0, 1, 2), rng.dirichlet(np.ones(8)))
        a = LocalResult(Subset((1, 2), "ZZ"), Pmf((1, 2), rng.dirichlet(np.ones(4))))
        b = LocalResult(Subset((0, 1), "ZZ"), Pmf((0, 1), rng.dirichlet(np.ones(4))))
        expected = bayesian_update(bayesian_update(glob, b), a)
        np.testing.assert_array_equal(reconstruct(glob, [a, b]).probs, expected.probs)
        # the last update is matched exactly
        np.testing.assert_allclose(reconstruct(glob, [a, b]).marginal((1, 2)).probs, a.pmf.probs, atol=1e-12)

    def test_passes_converge_on_consistent_locals(self, rng):
        psi = random_state(4, rng)
        ideal = ideal_pmf(psi, "ZZZZ")
        glob = apply_readout_noise(ideal, NoiseModel())
        locals_ = [LocalResult(s, ideal.marginal(s.qubits)) for s in sliding_window_subsets("ZZZZ", 2)]
        one = reconstruct(glob, locals_, passes=1)
        many = reconstruct(glob, locals_, passes=50)
        for loc in locals_:
            np.testing.assert_allclose(many.marginal(loc.subset.qubits).probs, loc.pmf.probs, atol=1e-6)
        assert kl(ideal, many) <= kl(ideal, one) + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 5), st.integers(1, 6), st.integers(0, 100_000))
    def test_valid_pmf(self, q, count, seed):
        rng = np.random.default_rng(seed)
        glob = Pmf(tuple(range(q)), rng.dirichlet(np.ones(2**q)))
        out = reconstruct(glob, [random_local(rng, list(range(q))) for _ in range(count)])
        assert np.all(out.probs >= 0)
        assert out.probs.sum() == pytest.approx(1.0, abs=1e-9)


class TestMitigationBenefit:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 100_000))
    def test_kl_to_ideal_never_increases(self, seed):
        ideal, glob, locals_ = noisy_instance(seed)
        assert kl(ideal, reconstruct(glob, locals_)) <= kl(ideal, glob) + 1e-12

    def test_tv_can_increase(self):
        # Bayesian updates are KL projections, not TV contractions.
        ideal, glob, locals_ = noisy_instance(37)
        out = reconstruct(glob, locals_)
        assert out.tv_distance(ideal) > glob.tv_distance(ideal)
        assert kl(ideal, out) < kl(ideal, glob)

    def test_tv_improves_on_most_instances(self):
        gains = []
        for seed in range(300):
            ideal, glob, locals_ = noisy_instance(seed)
            gains.append(glob.tv_distance(ideal) - reconstruct(glob, locals_).tv_distance(ideal))
        gains = np.array(gains)
        assert np.mean(gains > -1e-9) >= 0.9
        assert gains.mean() > 0

    def test_order_sensitivity_diagnostic(self):
        for seed in range(20):
            ideal, glob, locals_ = noisy_instance(seed)
            forward = reconstruct(glob, locals_)
            backward = glob
            for loc in reversed(locals_):
                backward = bayesian_update(backward, loc)
            discrepancy = max(glob.marginal(loc.subset.qubits).tv_distance(loc.pmf) for loc in locals_)
            logger.info("seed %d: order TV %.3g, max marginal discrepancy %.3g", seed, forward.tv_distance(backward), discrepancy)
            assert backward.probs.sum() == pytest.approx(1.0)


def ghz(q):
    psi = np.zeros(2**q, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


class TestRunMitigatedGroup:
    subsets = sliding_window_subsets("ZZZZ", 2)

    def test_prior_and_no_compatible_subset(self, rng):
        ex = Executor(NoiseModel())
        ex.load(ghz(4))
        prior = Pmf(tuple(range(4)), rng.dirichlet(np.ones(16)))
        out, circuits = run_mitigated_group(ex, "ZZZZ", [Subset((0, 1), "XX")], prior=prior)
        assert out is prior and circuits == 0

    def test_fresh_global_charges_subsets(self):
        ex = Executor(NoiseModel())
        ex.load(ghz(4))
        _, circuits = run_mitigated_group(ex, "ZZZZ", self.subsets)
        assert circuits == 4
        _, again = run_mitigated_group(ex, "ZZZZ", self.subsets)
        assert again == 1  # subsets already run for this state
        _, unshared = run_mitigated_group(ex, "ZZZZ", self.subsets, share_subsets=False)
        assert unshared == 4

    def test_noiseless_equals_ideal(self, rng):
        psi = random_state(4, rng)
        ex = Executor(NoiseModel.noiseless())
        ex.load(psi)
        out, _ = run_mitigated_group(ex, "ZZZZ", self.subsets)
        np.testing.assert_allclose(out.probs, ideal_pmf(psi, "ZZZZ").probs, atol=1e-9)

    def test_partial_overlap_subset_is_marginalized(self, rng):
        psi = random_state(3, rng)
        ex = Executor(NoiseModel.noiseless())
        ex.load(psi)
        prior = Pmf((0, 2), np.full(4, 0.25))
        out, circuits = run_mitigated_group(ex, "ZIZ", [Subset((1, 2), "XZ")], prior=prior)
        assert circuits == 1
        np.testing.assert_allclose(out.marginal((2,)).probs, ideal_pmf(psi, "IIZ").probs, atol=1e-12)


class TestReadoutMitigator:
    def test_fit_transform_cycle(self):
        glob = Pmf((0, 1, 2), np.full(8, 1 / 8))
        local = LocalResult(Subset((0, 1), "ZZ"), Pmf.point((0, 1), "00"))
        est = ReadoutMitigator().fit(glob)
        assert est.transform([local]).as_dict(1e-15) == {"000": pytest.approx(0.5), "001": pytest.approx(0.5)}
        assert clone(est).get_params() == {"passes": 1}

    def test_input_checks(self):
        with pytest.raises(TypeError):
            ReadoutMitigator().fit({"0": 1.0})
        est = ReadoutMitigator().fit(Pmf.point((0,), "0"))
        with pytest.raises(TypeError):
            est.transform([Pmf.point((0,), "0")])
        with pytest.raises(ValueError):
            ReadoutMitigator(passes=0).fit(Pmf.point((0,), "0"))
