import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrfm_jumps.dynamics import (
    EffectiveField,
    PhaseState,
    ct_position,
    effective_field,
    jump_probability,
    make_rng,
    mean_jump_probability,
    retain_probability,
    simulate_run,
)
from mrfm_jumps.noise import TelegraphConfig, draw_initial_sign, draw_interval
from mrfm_jumps.units import ModelParams

REF = ModelParams.reference()


def reference_run(params, n_kicks, seed, stream=()):
    """Kick-by-kick loop built only from the public single-step functions."""
    rng = make_rng(seed, stream)
    cfg = TelegraphConfig.from_model(params)
    sign = draw_initial_sign(cfg, rng)
    state = PhaseState()
    t = 0.0
    jumps = []
    for _ in range(n_kicks):
        u_gap, u_jump = rng.random(2)
        t = t + draw_interval(cfg, u_gap)
        before = effective_field(t, sign * params.delta_amp, params, state)
        after = effective_field(t, -sign * params.delta_amp, params, state)
        sign = -sign
        if u_jump < jump_probability(before, after):
            jumps.append(t)
            state = state.flipped(t, params.domega)
    return np.array(jumps), t


# --- ct_position / effective_field


def test_ct_position_cases():
    p = REF
    assert ct_position(0.0, PhaseState(), p) == p.x_m
    still = ModelParams.reference(domega=0.0)
    assert ct_position(math.pi, PhaseState(), still) == pytest.approx(-p.x_m, rel=1e-15)
    period = 2 * math.pi / (1 + p.domega)
    assert ct_position(period, PhaseState(), p) == pytest.approx(p.x_m, rel=1e-12)


def test_phase_continuous_across_flip():
    p = ModelParams.reference(domega=0.01)
    s = PhaseState()
    flipped = s.flipped(3.7, p.domega)
    assert ct_position(3.7, flipped, p) == pytest.approx(ct_position(3.7, s, p), rel=1e-14)
    assert flipped.branch == -1
    # after the flip the phase advances at 1 - domega
    assert flipped.phase_at(4.7, p.domega) - flipped.phase_at(3.7, p.domega) == pytest.approx(0.99)


def test_effective_field_cases():
    p = ModelParams.reference(eta=0.0)
    assert effective_field(1.23, 100.0, p, PhaseState()) == EffectiveField(1270.0, 0.0, 100.0)
    f = effective_field(math.pi / 2, 100.0, ModelParams.reference(domega=0.0), PhaseState())
    assert f.x == 1270.0 and f.y == 0.0
    assert f.z == pytest.approx(100.0, abs=1e-6)
    top = effective_field(0.0, 100.0, REF, PhaseState())
    assert top.z == pytest.approx(2 * REF.eta * REF.x_m + 100.0)


# --- jump_probability


def test_jump_probability_limits():
    a = (1270.0, 0.0, 100.0)
    assert jump_probability(a, a) == 0.0
    assert jump_probability(a, tuple(-v for v in a)) == pytest.approx(1.0, abs=1e-15)


def test_jump_probability_kick_at_crossing():
    eps, d = 1270.0, 100.0
    before, after = np.array([eps, 0, d]), np.array([eps, 0, -d])
    cos = before @ after / (np.linalg.norm(before) * np.linalg.norm(after))
    direct = (1 - cos) / 2
    closed = d**2 / (eps**2 + d**2)
    assert closed == pytest.approx(6.16e-3, rel=1e-3)
    assert jump_probability(before, after) == pytest.approx(direct, rel=1e-12)
    assert jump_probability(before, after) == pytest.approx(closed, rel=1e-12)


def test_jump_probability_zero_field():
    with pytest.raises(ValueError):
        jump_probability((0, 0, 0), (1, 0, 0))


vec = st.tuples(*[st.floats(-1e4, 1e4)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3)


@given(vec, vec, st.floats(1e-3, 1e3))
def test_jump_probability_properties(a, b, c):
    p = jump_probability(a, b)
    assert 0.0 <= p <= 1.0
    assert p == pytest.approx(jump_probability(b, a), abs=1e-12)
    assert p == pytest.approx(jump_probability(np.multiply(c, a), b), abs=1e-9)
    assert p + retain_probability(a, b) == pytest.approx(1.0, abs=1e-15)


def test_transverse_plane_concentration():
    p = REF
    zmax = 2 * p.eta * p.x_m
    at_cross = jump_probability((p.epsilon, 0, p.delta_amp), (p.epsilon, 0, -p.delta_amp))
    far = jump_probability((p.epsilon, 0, zmax + p.delta_amp), (p.epsilon, 0, zmax - p.delta_amp))
    assert at_cross / far >= (p.epsilon**2 + zmax**2) / (p.epsilon**2 + p.delta_amp**2)


# --- simulate_run


def test_engine_matches_reference_loop():
    params = ModelParams.reference(delta_amp=300.0, domega=1e-3)
    trace = simulate_run(params, max_kicks=40_000, seed=7, chunk_size=4096)
    ref, t_end = reference_run(params, 40_000, seed=7)
    assert len(ref) > 50
    np.testing.assert_array_equal(trace.jump_times, ref)
    assert trace.total_duration == t_end


def test_chunk_size_does_not_change_trace():
    params = ModelParams.reference(delta_amp=200.0)
    a = simulate_run(params, max_kicks=300_000, seed=3, chunk_size=997)
    b = simulate_run(params, max_kicks=300_000, seed=3)
    np.testing.assert_array_equal(a.jump_times, b.jump_times)
    np.testing.assert_array_equal(a.jump_kicks, b.jump_kicks)


def test_bit_reproducible_and_stream_dependent():
    a = simulate_run(REF, max_kicks=200_000, seed=1)
    b = simulate_run(REF, max_kicks=200_000, seed=1)
    c = simulate_run(REF, max_kicks=200_000, seed=1, stream=(0, 1))
    assert a.jump_times.tobytes() == b.jump_times.tobytes()
    assert not np.array_equal(a.jump_times, c.jump_times)


def test_zero_noise_never_jumps():
    trace = simulate_run(ModelParams.reference(delta_amp=0.0), max_kicks=100_000, seed=0)
    assert trace.n_jumps == 0
    assert trace.kick_count == 100_000


def test_max_time_stop():
    trace = simulate_run(REF, max_time=500.0, seed=2, record_kicks=10**6)
    assert trace.total_duration == 500.0
    assert trace.kicks[-1].time <= 500.0
    assert trace.kicks[-1].time + REF.tau0 + REF.dtau > 500.0
    assert np.all(trace.jump_times <= 500.0)


def test_jumps_happen_at_kicks():
    params = ModelParams.reference(delta_amp=300.0)
    trace = simulate_run(params, max_kicks=50_000, seed=4, record_kicks=50_000)
    kick_times = np.array([k.time for k in trace.kicks])
    signs = np.array([k.sign_after for k in trace.kicks])
    assert np.all(signs[1:] == -signs[:-1])
    assert np.all(np.diff(trace.jump_times) > 0)
    np.testing.assert_array_equal(kick_times[trace.jump_kicks - 1], trace.jump_times)


def test_geometric_mean_without_gradient():
    params = ModelParams.reference(eta=0.0)
    trace = simulate_run(params, max_kicks=3_000_000, seed=9)
    iv = trace.intervals
    expected = params.tau0 * (params.epsilon**2 + params.delta_amp**2) / params.delta_amp**2
    assert expected == pytest.approx(1.623, rel=1e-3)
    assert abs(iv.mean() - expected) < 3 * iv.std() / math.sqrt(len(iv))


def test_reference_intervals_cluster_at_multiples_of_pi():
    trace = simulate_run(REF, max_kicks=5_000_000, seed=5)
    iv = trace.intervals
    off = np.abs(iv - math.pi * np.round(iv / math.pi))
    assert np.mean(off < 0.2) > 0.9


def test_mean_jump_probability_against_crossing_estimate():
    # small-Delta crossing integral: each crossing flips with pi*Delta^2/(2*eps*tau0*2*eta*x_m)
    p = REF
    per_crossing = math.pi * p.delta_amp**2 / (2 * p.epsilon * p.tau0 * 2 * p.eta * p.x_m)
    approx_mean = math.pi / per_crossing
    assert p.tau0 / mean_jump_probability(p) == pytest.approx(approx_mean, rel=0.02)


@pytest.mark.parametrize("kw", [dict(), dict(max_kicks=0), dict(max_kicks=10, max_time=1.0),
                                dict(max_time=-1.0), dict(max_kicks=2.5)])
def test_stop_criterion_validation(kw):
    with pytest.raises(ValueError):
        simulate_run(REF, **kw)


def test_telegraph_must_match_params():
    with pytest.raises(ValueError):
        simulate_run(REF, TelegraphConfig(50.0, 0.01, 0.0025), max_kicks=10)
