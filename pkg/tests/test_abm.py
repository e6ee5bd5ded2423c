import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtail import abm, tails
from gtail.errors import DomainError


def two_particle(gap, dt=1e-4, t_final=1e-3, seed=0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = abm.AbmConfig(left_extent=gap, init_spacing=gap, dt=dt, t_final=t_final, seed=seed, rel_step=1.0)
    return abm.simulate(cfg, keep_positions=True)


def test_far_pair_survives_in_order():
    r = two_particle(gap=5.0)
    assert r.n_survivors == 2 and r.annihilations == 0
    assert r.positions[0] < r.positions[1]


def test_close_pair_annihilates():
    dead = sum(two_particle(gap=1e-4, seed=s).n_survivors == 0 for s in range(50))
    assert dead >= 49


def test_annihilated_configuration_is_flagged():
    r = two_particle(gap=1e-5)
    assert r.empty and r.rightmost_rescaled == -np.inf


def test_bookkeeping_and_order():
    cfg = abm.AbmConfig(left_extent=12.0, init_spacing=0.05, seed=3)
    r = abm.simulate(cfg, keep_positions=True)
    assert r.n_survivors + 2 * r.annihilations == cfg.initial_count
    assert np.all(np.diff(r.positions) > 0)
    assert r.rightmost_rescaled == pytest.approx(r.positions[-1] / 2.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=40), st.integers(1, 3))
def test_annihilate_resolves_all_inversions(values, n_lanes):
    y = np.array(values)
    lane = np.sort(np.arange(y.size) % n_lanes)
    x_prev = np.sort(y)  # any ordered configuration; hits from inversions only
    hit = (lane[1:] == lane[:-1]) & (y[1:] <= y[:-1])
    out, out_lane = abm.annihilate(y, lane, hit)
    same = out_lane[1:] == out_lane[:-1]
    assert np.all(out[1:][same] > out[:-1][same])
    for k in range(n_lanes):
        assert (np.sum(lane == k) - np.sum(out_lane == k)) % 2 == 0
    assert x_prev.size >= out.size


def test_config_warnings_and_errors():
    with pytest.warns(RuntimeWarning):
        abm.AbmConfig(init_spacing=0.5)
    with pytest.warns(RuntimeWarning):
        abm.AbmConfig(left_extent=3.0)
    with pytest.raises(DomainError):
        abm.AbmConfig(dt=0.0)


def test_batch_determinism_across_workers():
    cfg = abm.AbmConfig(init_spacing=0.05, seed=4, lanes=16)
    a = abm.simulate_many(cfg, 64, workers=1)
    b = abm.simulate_many(cfg, 64, workers=3)
    np.testing.assert_array_equal(a.rightmost_rescaled, b.rightmost_rescaled)
    np.testing.assert_array_equal(a.n_survivors + 2 * a.annihilations, cfg.initial_count)
    assert a.empty_count == 0


@pytest.fixture(scope="module")
def base_batch():
    return abm.simulate_many(abm.AbmConfig(init_spacing=0.02, seed=10), 2560)


def test_rescaled_tail_monotone(base_batch):
    c = abm.rescaled_tail(base_batch, np.linspace(0, 2, 21))
    lp = c.empirical_log_prob[c.defined]
    assert np.all(np.diff(lp) <= 0)
    c2 = abm.rescaled_tail(list(base_batch.results()), [1.0])
    assert c2.empirical_log_prob[0] == c.empirical_log_prob[10]


def test_spacing_refinement_stable(base_batch):
    fine = abm.simulate_many(abm.AbmConfig(init_spacing=0.01, seed=11), 2560)
    a = abm.rescaled_tail(base_batch, [1.0])
    b = abm.rescaled_tail(fine, [1.0])
    diff = abs(a.empirical_log_prob[0] - b.empirical_log_prob[0])
    assert diff < 2 * math.hypot(a.stderr[0], b.stderr[0])


def test_diffusive_scaling(base_batch):
    later = abm.simulate_many(abm.AbmConfig(left_extent=17.0, init_spacing=0.02, t_final=2.0, seed=12), 2560)
    _, p = tails.two_sample_ks(base_batch.rightmost_rescaled, later.rightmost_rescaled)
    assert p > 0.01
