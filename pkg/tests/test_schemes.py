import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdbeam.channel import ChannelModelParams, ChannelSet, dbm_to_watts, example1_channels, sample_channels
from tdbeam.eh_model import EhParams, dc_power
from tdbeam.schemes import (AlgorithmSettings, Schedule, evaluate, isotropic, multibeam, tdma,
                            time_division)
from tdbeam.solver_kernels import Covariance, isotropic_covariance, mrt_covariance

from oracles import multibeam_grid, time_lp_grid, two_slot_brute_force

EH = EhParams()


def random_channels(rng, K, M, scale=1e-2):
    h = scale * (rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))) / np.sqrt(2)
    return ChannelSet(h)


# ------------------------------------------------------------ Schedule / settings

def test_schedule_invariants():
    c = isotropic_covariance(2, 1.0)
    Schedule(((0.3, c), (0.7, c)), 1.0)
    with pytest.raises(ValueError):
        Schedule(((0.3, c), (0.6, c)), 1.0)
    with pytest.raises(ValueError):
        Schedule(((-0.1, c), (1.1, c)), 1.0)
    with pytest.raises(ValueError):
        Schedule((), 1.0)
    with pytest.raises(ValueError):
        Schedule(((0.5, c), (0.5, isotropic_covariance(3, 1.0))), 1.0)


@pytest.mark.parametrize("kw", [dict(epsilon_outer=0), dict(gamma_floor=0),
                                dict(gamma_init=1e-3, gamma_floor=1e-2),
                                dict(init_strategy="random"), dict(num_slots=0),
                                dict(max_inner=0)])
def test_settings_validation(kw):
    with pytest.raises(ValueError):
        AlgorithmSettings(**kw)


def test_settings_defaults():
    s = AlgorithmSettings()
    assert s.resolved_gamma_init(EH) == pytest.approx(0.25 * 5.365)
    assert (s.max_outer, s.max_inner, s.init_strategy) == (50, 60, "best_of_baselines")
    with pytest.raises(ValueError):
        AlgorithmSettings.from_config({"bogus": 1})


# ------------------------------------------------------------ evaluate

def test_evaluate_example1():
    ch = example1_channels()
    half = Covariance(np.diag([3.75, 3.75, 3.75, 3.75]).astype(complex), 15.0)
    ev = evaluate(Schedule(((1.0, half),), 1.0), ch, EH)
    # equal split across the two MRT beams equals the isotropic matrix here
    assert ev.rf_mw[:, 0] == pytest.approx([0.75, 0.75])
    mb = Covariance(0.5 * (mrt_covariance(ch, 0, 15).matrix + mrt_covariance(ch, 1, 15).matrix), 15.0)
    ev = evaluate(Schedule(((1.0, mb),), 1.0), ch, EH)
    assert ev.min_dc_energy == pytest.approx(0.9127, abs=1e-3)
    sched = Schedule.from_parts([0.5, 0.5], [mrt_covariance(ch, 0, 15), mrt_covariance(ch, 1, 15)], 1.0)
    ev = evaluate(sched, ch, EH)
    assert ev.min_dc_energy == pytest.approx(0.9833, abs=1e-3)
    assert ev.min_dc_energy == ev.per_er_dc_energy.min()


def test_evaluate_zero_covariance():
    ch = example1_channels()
    z = Covariance(np.zeros((4, 4)), 15.0)
    assert evaluate(Schedule(((1.0, z),), 1.0), ch, EH).min_dc_energy == 0.0


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(Schedule(((1.0, isotropic_covariance(2, 1.0)),), 1.0), example1_channels(), EH)


# ------------------------------------------------------------ baselines

def test_example1_baselines():
    ch = example1_channels()
    s, r = multibeam(ch, 15.0, 1.0, EH)
    assert r.min_dc_energy == pytest.approx(0.9127, abs=1e-3)
    assert r.rf_mw[:, 0] == pytest.approx([1.5, 1.5], abs=1e-6)
    s, r = tdma(ch, 15.0, 1.0, EH)
    assert s.durations == pytest.approx([0.5, 0.5], abs=1e-6)
    assert r.min_dc_energy == pytest.approx(0.9833, abs=1e-3)
    s, r = isotropic(4, 15.0, 1.0, ch, EH)
    assert r.rf_mw[:, 0] == pytest.approx([0.75, 0.75])


def test_single_receiver_baselines():
    ch = random_channels(np.random.default_rng(3), 1, 3)
    s, r = tdma(ch, 2.0, 1.5, EH)
    assert s.num_slots == 1 and s.durations[0] == pytest.approx(1.5)
    _, rm = multibeam(ch, 2.0, 1.5, EH)
    assert rm.min_dc_energy == pytest.approx(r.min_dc_energy, rel=1e-6)


def test_isotropic_rf_is_scaled_norm():
    ch = sample_channels(ChannelModelParams(num_ers=6, num_antennas=5), 1)
    _, r = isotropic(5, 3.0, 1.0, ch, EH)
    assert r.rf_mw[:, 0] == pytest.approx(1e3 * 3.0 / 5 * ch.gains)


def test_isotropic_single_antenna_equals_mrt():
    ch = random_channels(np.random.default_rng(0), 3, 1)
    _, ri = isotropic(1, 2.0, 1.0, ch, EH)
    assert ri.rf_mw[:, 0] == pytest.approx(ch.rf_mw(mrt_covariance(ch, 0, 2.0)))


@pytest.mark.parametrize("seed", range(3))
def test_tdma_three_receivers_vs_simplex_grid(seed):
    ch = random_channels(np.random.default_rng(seed), 3, 3)
    p = 5.0
    s, r = tdma(ch, p, 1.0, EH)
    D = np.stack([dc_power(EH, ch.rf_mw(mrt_covariance(ch, n, p))) for n in range(3)], 1)
    assert r.min_dc_energy == pytest.approx(time_lp_grid(D, 1.0), rel=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_multibeam_two_by_two_vs_grid(seed):
    ch = random_channels(np.random.default_rng(20 + seed), 2, 2)
    p = 5.0
    _, r = multibeam(ch, p, 1.0, EH)
    oracle = dc_power(EH, multibeam_grid(ch, p))
    assert r.min_dc_energy == pytest.approx(oracle, rel=5e-3)
    assert r.min_dc_energy >= oracle * (1 - 1e-9)


# ------------------------------------------------------------ time division

def test_example1_time_division():
    ch = example1_channels()
    s, r = time_division(ch, 15.0, 1.0, EH)
    # Q(3)/2 is optimal: with orthogonal channels each slot splits at most
    # 3 mW and Q is convex and zero at the origin on [0, 3]
    assert r.min_dc_energy == pytest.approx(dc_power(EH, 3.0) / 2, abs=1e-9)
    assert np.all(np.diff(r.objective_trace) >= 0)


@pytest.mark.parametrize("strategy", ["tdma", "multibeam", "uniform", "best_of_baselines"])
def test_init_strategies_are_monotone(strategy):
    ch = sample_channels(ChannelModelParams(num_ers=5, num_antennas=3), 2)
    p = dbm_to_watts(37)
    s, r = time_division(ch, p, 1.0, EH, AlgorithmSettings(init_strategy=strategy))
    assert np.all(np.diff(r.objective_trace) >= 0)
    assert r.min_dc_energy == pytest.approx(r.objective_trace[-1])
    assert r.min_dc_energy == pytest.approx(evaluate(s, ch, EH).min_dc_energy)
    assert s.num_slots == 5
    for c in s.covariances:
        assert np.linalg.eigvalsh(c.matrix)[0] >= -1e-8 * p
        assert c.trace <= p + 1e-8


@pytest.mark.parametrize("N", [1, 2, 7])
def test_slot_count_knob(N):
    ch = sample_channels(ChannelModelParams(num_ers=4, num_antennas=2), 6)
    s, r = time_division(ch, dbm_to_watts(38), 1.0, EH, AlgorithmSettings(num_slots=N))
    assert s.num_slots == N
    assert s.durations.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(3))
def test_time_division_two_by_two_vs_brute_force(seed):
    ch = random_channels(np.random.default_rng(50 + seed), 2, 2)
    p = 1.5 / np.mean(1e3 * ch.gains)      # MRT RF of a few mW: the convex regime
    _, r = time_division(ch, p, 1.0, EH)
    oracle = two_slot_brute_force(ch, p, 1.0, lambda q: dc_power(EH, np.clip(q, 0, None)))
    assert r.min_dc_energy >= oracle * 0.98
    assert r.min_dc_energy <= oracle * 1.01


def test_block_length_scaling():
    ch = sample_channels(ChannelModelParams(num_ers=4, num_antennas=3), 10)
    p = dbm_to_watts(38)
    for fn in (multibeam, tdma):
        _, r1 = fn(ch, p, 1.0, EH)
        _, r3 = fn(ch, p, 3.0, EH)
        assert r3.per_er_dc_energy == pytest.approx(3 * r1.per_er_dc_energy, rel=1e-6)
    s1, r1 = time_division(ch, p, 1.0, EH)
    s3, r3 = time_division(ch, p, 3.0, EH, AlgorithmSettings(epsilon_outer=3e-5))
    assert r3.min_dc_energy == pytest.approx(3 * r1.min_dc_energy, rel=1e-3)
    assert s3.durations.sum() == pytest.approx(3.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.sampled_from([2, 4]), st.integers(0, 10 ** 6), st.floats(30.0, 46.0))
def test_dominance_and_baseline_order(K, M, seed, p_dbm):
    ch = sample_channels(ChannelModelParams(num_ers=K, num_antennas=M), seed)
    p = dbm_to_watts(p_dbm)
    _, mb = multibeam(ch, p, 1.0, EH)
    _, td = tdma(ch, p, 1.0, EH)
    _, iso = isotropic(M, p, 1.0, ch, EH)
    _, tdb = time_division(ch, p, 1.0, EH)
    assert tdb.min_dc_energy >= max(mb.min_dc_energy, td.min_dc_energy) - 1e-6
    assert mb.min_dc_energy >= iso.min_dc_energy - 1e-9
