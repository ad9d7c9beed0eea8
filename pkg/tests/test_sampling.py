"""Warp and sampling contracts: exact examples plus seeded property checks."""

import numpy as np
import pytest

from speckit.rng import CounterRng
from speckit.sampling import (
    SamplingConfig,
    apply_warp,
    log_view,
    sample,
    validate_distribution,
)

from oracles import total_variation


def test_identity_warp_leaves_distribution_unchanged():
    dist = np.array([0.1, 0.2, 0.3, 0.4])
    out = apply_warp(dist, SamplingConfig(temperature=1.0, top_p=1.0))
    assert np.array_equal(out, dist)


def test_temperature_zero_is_argmax_one_hot():
    out = apply_warp(np.array([0.5, 0.3, 0.2]), SamplingConfig(temperature=0.0))
    assert out.tolist() == [1.0, 0.0, 0.0]


def test_temperature_zero_tie_breaks_to_lowest_token():
    out = apply_warp(np.array([0.4, 0.4, 0.2]), SamplingConfig(temperature=0.0))
    assert out.tolist() == [1.0, 0.0, 0.0]


def test_nucleus_keeps_minimal_prefix_and_renormalizes():
    out = apply_warp(np.array([0.5, 0.3, 0.2]), SamplingConfig(temperature=1.0, top_p=0.7))
    assert np.allclose(out, [0.625, 0.375, 0.0], atol=1e-12)


def test_nucleus_mass_exact_boundary():
    # 0.5 alone already reaches top_p=0.5: the survivor set is minimal.
    out = apply_warp(np.array([0.5, 0.3, 0.2]), SamplingConfig(top_p=0.5))
    assert out.tolist() == [1.0, 0.0, 0.0]


def test_warp_preserves_rank_order_among_survivors():
    gen = np.random.default_rng(0)
    for _ in range(200):
        dist = gen.dirichlet(np.full(8, 0.4))
        cfg = SamplingConfig(
            temperature=float(gen.uniform(0.2, 2.0)), top_p=float(gen.uniform(0.3, 1.0))
        )
        out = apply_warp(dist, cfg)
        survivors = np.nonzero(out)[0]
        for i in survivors:
            for j in survivors:
                if dist[i] > dist[j]:
                    assert out[i] >= out[j]


def test_nucleus_survivors_are_minimal_sorted_prefix():
    gen = np.random.default_rng(1)
    for _ in range(200):
        dist = gen.dirichlet(np.full(6, 0.5))
        top_p = float(gen.uniform(0.2, 0.99))
        out = apply_warp(dist, SamplingConfig(top_p=top_p))
        order = np.lexsort((np.arange(dist.size), -dist))
        csum = np.cumsum(dist[order])
        expected_size = int(np.searchsorted(csum, top_p - 1e-9, side="left")) + 1
        assert set(np.nonzero(out)[0]) == set(order[:expected_size])
        assert abs(out.sum() - 1.0) < 1e-9


def test_sample_one_hot_returns_that_token():
    rng = CounterRng(0, "s")
    for _ in range(20):
        assert sample(np.array([0.0, 0.0, 1.0, 0.0]), rng) == 2


def test_sample_consumes_exactly_one_draw():
    rng = CounterRng(5, "s")
    sample(np.array([0.25, 0.25, 0.25, 0.25]), rng)
    assert rng.counter == 1


def test_sample_deterministic_for_fixed_counter():
    dist = np.array([0.3, 0.4, 0.3])
    a = sample(dist, CounterRng(11, "s", counter=37))
    b = sample(dist, CounterRng(11, "s", counter=37))
    assert a == b


def test_fair_coin_frequency():
    rng = CounterRng(123, "s")
    dist = np.array([0.5, 0.5])
    hits = sum(sample(dist, rng) == 0 for _ in range(100_000))
    assert 0.49 <= hits / 100_000 <= 0.51


def test_sample_empirical_tv_below_one_percent():
    gen = np.random.default_rng(2)
    dist = gen.dirichlet(np.full(6, 0.7))
    rng = CounterRng(77, "s")
    counts = np.zeros(6)
    for _ in range(100_000):
        counts[sample(dist, rng)] += 1
    assert total_variation(counts / counts.sum(), dist) < 0.01


def test_sample_never_returns_zero_probability_token():
    dist = np.array([0.5, 0.0, 0.5, 0.0])
    rng = CounterRng(9, "s")
    assert all(sample(dist, rng) in (0, 2) for _ in range(2000))


def test_log_view_consistent_with_linear_view():
    dist = validate_distribution(np.array([0.5, 0.25, 0.25]))
    assert np.max(np.abs(np.exp(log_view(dist)) - dist)) < 1e-9
    assert log_view(np.array([0.0, 1.0]))[0] == -np.inf


def test_validate_distribution_rejects_bad_vectors():
    with pytest.raises(ValueError):
        validate_distribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        validate_distribution(np.array([-0.1, 1.1]))
    with pytest.raises(ValueError):
        validate_distribution(np.array([]))


def test_sampling_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(temperature=-0.1)
    with pytest.raises(ValueError):
        SamplingConfig(top_p=0.0)
    with pytest.raises(ValueError):
        SamplingConfig(top_p=1.5)
    with pytest.raises(ValueError):
        SamplingConfig(max_new_tokens=-1)
    SamplingConfig(max_new_tokens=0)  # empty generations are allowed
