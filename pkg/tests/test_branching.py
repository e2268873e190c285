import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yuleperc import branching as br
from yuleperc import seeding
from yuleperc.branching import Mass
from yuleperc.errors import InvariantViolation, ParameterError
from yuleperc.models import BAry, ScaleFree


class Fixed:
    """Deterministic stand-in for a generator: yields preset uniforms."""

    def __init__(self, *u):
        self.u = list(u)

    def random(self):
        return self.u.pop(0)


def bary_params(b=2, p=0.5, n=10):
    return br.BranchingParams.with_p(BAry(b), p, n)


def test_step_bary_forced_clone():
    prm = bary_params(2, 0.5)
    start = br.initial_state(prm)
    birth = br.step(start, prm, Fixed(0.9, 0.1))
    assert (birth.z0, birth.z_mut, birth.mutations) == (3, 0, 0)
    mut = br.step(start, prm, Fixed(0.9, 0.7))
    assert (mut.z0, mut.z_mut, mut.mutations) == (1, 2, 1)


def test_step_scalefree_a0():
    prm = br.BranchingParams.with_p(ScaleFree(0.0), 0.5, 10)
    start = br.initial_state(prm, seed_edge="intact")
    birth = br.step(start, prm, Fixed(0.0, 0.1))
    mut = br.step(start, prm, Fixed(0.0, 0.9))
    assert (birth.z0, birth.z_mut) == (4, 0)
    assert (mut.z0, mut.z_mut, mut.mutations) == (3, 1, 1)
    assert birth.total == mut.total == 4


@given(st.integers(2, 7), st.floats(0.01, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_total_jump_is_deterministic(b, p, seed):
    prm = bary_params(b, p)
    rng = np.random.default_rng(seed)
    state = br.initial_state(prm)
    for k in range(1, 30):
        before = state.total
        state = br.step(state, prm, rng)
        assert state.total - before == b - 1
        assert state.total == b + (b - 1) * k


def test_step_on_empty_population():
    prm = bary_params()
    empty = br.BranchingState(Mass(0), Mass(0))
    with pytest.raises(InvariantViolation):
        br.step(empty, prm, np.random.default_rng(0))


def test_from_c():
    prm = br.BranchingParams.from_c(BAry(2), 1.0, 100)
    assert prm.p == pytest.approx(1 - 1 / math.log(100))
    with pytest.raises(ParameterError):
        br.BranchingParams.from_c(BAry(2), 5.0, 100)


def test_run_until_zero_steps():
    prm = bary_params(2, 0.5, 1)
    out = br.run_until(prm, br.TotalReaches(2), rng=np.random.default_rng(0))
    assert (out.final.z0, out.final.z_mut, out.final.mutations, out.final.steps) == (2, 0, 0, 0)
    assert br.cluster_from_coupling(out, prm) == 1


@pytest.mark.parametrize("b", [2, 3, 5])
def test_run_until_step_count(b):
    prm = bary_params(b, 0.8, 40)
    out = br.run_until(prm, br.TotalReaches(prm.total_for_size()), rng=np.random.default_rng(1))
    assert out.final.steps == 39
    assert 1 <= br.cluster_from_coupling(out, prm) <= 40


def test_unreachable_target_rejected_before_drawing():
    prm = bary_params(3, 0.8, 40)

    class Boom:
        def random(self):
            raise AssertionError("drew a random number")

    with pytest.raises(ParameterError):
        br.run_until(prm, br.TotalReaches(10), rng=Boom())  # 3 + 2k never equals 10


def test_time_rule_needs_continuous_mode():
    with pytest.raises(ParameterError):
        br.run_until(bary_params(), br.TimeReaches(1.0), "jump", np.random.default_rng(0))


def test_kernel_matches_reference_step():
    for family, p in [(BAry(2), 0.6), (BAry(4), 0.3), (ScaleFree(0.7), 0.5), (ScaleFree(-0.5), 0.9)]:
        prm = br.BranchingParams.with_p(family, p, 60)
        for seed in range(20):
            for continuous in (False, True):
                r1 = np.random.Generator(np.random.Philox(seed))
                r2 = np.random.Generator(np.random.Philox(seed))
                state = br.initial_state(prm, r1, continuous=continuous)
                for _ in range(59):
                    state = br.step(state, prm, r1, continuous)
                mode = "continuous" if continuous else "jump"
                out = br.run_until(prm, br.TotalReaches(prm.total_for_size()), mode, r2)
                assert out.final == state
                assert r1.random() == r2.random()


def test_ancestral_extinction_is_an_outcome():
    prm = bary_params(2, 0.05, 10)
    batch = br.run_replicas(prm, br.AncestralReaches(50), 200, 3)
    assert batch.extinct.any()
    ext = batch.extinct
    assert np.all(batch.z0[ext] == 0) and np.all(batch.z_mut[ext] > 0)
    # the coupled root cluster survives extinction of its external slots
    assert np.all(batch.cluster[ext] >= 1)


def test_coupling_examples():
    prm = br.BranchingParams.with_p(ScaleFree(0.0), 1.0, 25)
    out = br.run_until(prm, br.TotalReaches(prm.total_for_size()), rng=np.random.default_rng(0))
    assert out.final.mutations == 0
    assert br.cluster_from_coupling(out, prm) == 26  # whole tree {0..n}


def test_cluster_from_coupling_requires_size_n():
    prm = bary_params(2, 0.5, 10)
    out = br.run_until(prm, br.TotalReaches(5), rng=np.random.default_rng(0))
    with pytest.raises(ParameterError):
        br.cluster_from_coupling(out, prm)


def test_check_state_catches_broken_integrality():
    bad = br.BranchingState(Mass(3), Mass(4), mutations=1, steps=4)
    with pytest.raises(InvariantViolation):
        br.check_state(bad, BAry(3))


@given(st.sampled_from(["bary", "sf"]), st.integers(2, 5), st.floats(-0.9, 3.0),
       st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_invariants_along_trajectories(kind, b, a, p, seed):
    family = BAry(b) if kind == "bary" else ScaleFree(a)
    prm = br.BranchingParams.with_p(family, p, 80)
    rng = np.random.default_rng(seed)
    state = br.initial_state(prm, rng)
    br.check_state(state, family)
    prev = state
    for _ in range(79):
        state = br.step(state, prm, rng)
        br.check_state(state, family)
        assert state.mutations >= prev.mutations and state.z_mut >= prev.z_mut
        if state.z0 < prev.z0:
            assert isinstance(family, BAry) and prev.z0 - state.z0 == 1
        prev = state


def test_germ_trivial_p_one():
    prm = bary_params(2, 1.0, 1000)
    g = br.germ_statistics(prm, np.random.default_rng(0))
    assert g == br.GermSample(0.0, 0.0, False)


@pytest.mark.parametrize("family", [BAry(2), BAry(3), ScaleFree(1.0), ScaleFree(-0.4)])
def test_germ_ordering(family):
    prm = br.BranchingParams.from_c(family, 1.0, 10**4)
    for g in br.germ_replicas(prm, 200, 4):
        assert g.delta <= g.delta0


def test_germ_needs_n_three():
    with pytest.raises(ParameterError):
        br.germ_statistics(bary_params(2, 0.5, 2), np.random.default_rng(0))


def test_martingales_continuous_time():
    b, p, t, reps = 2, 0.7, 1.0, 100_000
    prm = bary_params(b, p)
    batch = br.run_replicas(prm, br.TimeReaches(t), reps, 21, "continuous", threads=4,
                            seed_edge="intact")
    w = np.exp(-(b - 1) * t) * (batch.z0 + batch.z_mut)
    w0 = np.exp(-(b * p - 1) * t) * batch.z0
    for x in (w, w0):
        assert abs(x.mean() - b) <= 5 * x.std(ddof=1) / math.sqrt(reps)


def test_conditional_mutation_estimator_matches_direct():
    prm = bary_params(2, 0.7)
    direct, _ = br.filtered_poisson_estimates(prm, 1.0, [0.3], 20_000, 5, threads=4)
    exact = br.conditional_mutation_estimates(prm, 1.0, [0.3], 20_000, 5, threads=4)
    d, e = direct[0], exact[0]
    assert abs(d.value.real - e.value.real) <= 5 * math.hypot(d.se_re, e.se_re)
    assert abs(d.value.imag - e.value.imag) <= 5 * math.hypot(d.se_im, e.se_im)


def test_run_replicas_thread_invariant():
    prm = br.BranchingParams.from_c(ScaleFree(0.3), 1.0, 300)
    stop = br.TotalReaches(prm.total_for_size())
    one = br.run_replicas(prm, stop, 64, 8, threads=1)
    many = br.run_replicas(prm, stop, 64, 8, threads=6)
    for field in ("z0_ones", "z0_as", "zmut_ones", "zmut_as", "mutations", "cluster"):
        assert np.array_equal(getattr(one, field), getattr(many, field))
    rng = seeding.replica_rng(8, 10, seeding.BRANCH)
    assert br.run_until(prm, stop, rng=rng).derived_cluster == one.cluster[10]
