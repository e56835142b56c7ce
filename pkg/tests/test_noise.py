import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mrfm_jumps.noise import (
    KickEvent,
    TelegraphConfig,
    draw_interval,
    generate_kicks,
    iter_kicks,
    next_kick,
    value_at,
)


def test_jitter_free_kick_is_exact():
    # binary-exact tau0 so the sum is exact in floating point
    cfg = TelegraphConfig(100.0, 0.25, 0.0, 1)
    k = next_kick(cfg, KickEvent(5 * 0.25, 1), np.random.default_rng(0))
    assert k.time == 6 * 0.25
    assert k.sign_after == -1


def test_intervals_within_bounds():
    cfg = TelegraphConfig(100.0, 0.01, 0.0025, 1)
    kicks = generate_kicks(cfg, 20000, seed=3)
    gaps = np.diff([0.0] + [k.time for k in kicks])
    assert gaps.min() >= 0.0075 - 1e-15
    assert gaps.max() <= 0.0125 + 1e-15


def test_interval_mean_and_uniformity():
    cfg = TelegraphConfig(100.0, 0.01, 0.0025)
    n = 10**6
    gaps = draw_interval(cfg, np.random.default_rng(11).random(n))
    # uniform law: mean tau0, sd 2*dtau/sqrt(12)
    se = 2 * cfg.dtau / np.sqrt(12) / np.sqrt(n)
    assert abs(gaps.mean() - cfg.tau0) < 3 * se
    assert stats.kstest(gaps, stats.uniform(loc=0.0075, scale=0.005).cdf).pvalue > 0.01


def test_lazy_stream_matches_draw_order():
    cfg = TelegraphConfig(1.0, 0.5, 0.25, 1)
    kicks = list(itertools.islice(iter_kicks(cfg, np.random.default_rng(5)), 50))
    u = np.random.default_rng(5).random(50)
    assert np.allclose(np.cumsum(draw_interval(cfg, u)), [k.time for k in kicks], rtol=1e-14)


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.floats(1e-3, 1.0), st.floats(0, 1), st.sampled_from([None, 1, -1]))
def test_alternation_and_monotonic_times(seed, tau0, frac, sign):
    cfg = TelegraphConfig(3.0, tau0, frac * tau0, sign)
    kicks = generate_kicks(cfg, 200, seed)
    signs = np.array([k.sign_after for k in kicks])
    times = np.array([k.time for k in kicks])
    assert np.all(signs[1:] == -signs[:-1])
    assert np.all(np.diff(times) > 0)
    if sign is not None:
        assert kicks[0].sign_after == -sign


def test_determinism():
    cfg = TelegraphConfig(1.0, 0.1, 0.05)
    assert generate_kicks(cfg, 100, 42) == generate_kicks(cfg, 100, 42)


def test_value_at():
    cfg = TelegraphConfig(100.0, 0.01, 0.0025, initial_sign=1)
    kicks = generate_kicks(cfg, 1000, seed=1)
    assert value_at(kicks, cfg, 0.0) == 100.0
    assert value_at(kicks, cfg, kicks[0].time / 2) == 100.0
    assert value_at(kicks, cfg, kicks[0].time + 1e-12) == -100.0
    grid = np.linspace(0, kicks[-1].time, 5000)
    assert set(np.unique(value_at(kicks, cfg, grid))) == {-100.0, 100.0}


def test_value_at_outside_range():
    cfg = TelegraphConfig(1.0, 0.01, 0.0, 1)
    kicks = generate_kicks(cfg, 10)
    with pytest.raises(ValueError):
        value_at(kicks, cfg, kicks[-1].time + 0.1)
    with pytest.raises(ValueError):
        value_at(kicks, cfg, -1.0)


@pytest.mark.parametrize("kw", [dict(dtau=0.02), dict(tau0=0), dict(delta_amp=-1), dict(initial_sign=2)])
def test_config_validation(kw):
    base = dict(delta_amp=1.0, tau0=0.01, dtau=0.0)
    base.update(kw)
    with pytest.raises(ValueError):
        TelegraphConfig(**base)
