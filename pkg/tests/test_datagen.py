import dataclasses

import numpy as np
import pytest

from weightcraft.datagen import (
    BEHAVIORS,
    DatagenConfig,
    NoiseSpec,
    generate_dataset,
    group_attributes,
)
from weightcraft.errors import ValidationError

ZERO = NoiseSpec(0.0, 0.0, 0.0)


def _url_totals(table, column):
    return np.bincount(table.url_id, weights=column)


def test_default_noise_levels():
    n = NoiseSpec()
    assert (n.sigma_views, n.sigma_likes, n.sigma_reaction) == (2228.0, 22.0, 10.0)
    np.testing.assert_array_equal(n.count_sigmas(), [22, 10, 10, 10, 10, 10])


def test_zero_noise_gives_integer_counts():
    table, _ = generate_dataset(DatagenConfig(n_urls=40, n_periods=2, seed=3), ZERO)
    np.testing.assert_array_equal(table.counts, np.round(table.counts))
    np.testing.assert_array_equal(table.views, np.round(table.views))
    assert table.counts.min() >= 0
    assert np.all(table.counts.sum(axis=1) <= table.views)


def test_each_sigma_only_perturbs_its_own_columns():
    cfg = DatagenConfig(n_urls=30, n_periods=2, seed=8)
    clean, _ = generate_dataset(cfg, ZERO)
    likes_only, _ = generate_dataset(cfg, NoiseSpec(0.0, 22.0, 0.0))
    np.testing.assert_array_equal(likes_only.views, clean.views)
    np.testing.assert_array_equal(likes_only.counts[:, 1:], clean.counts[:, 1:])
    assert not np.array_equal(likes_only.counts[:, 0], clean.counts[:, 0])


def test_noise_standard_deviation_matches_configuration():
    cfg = DatagenConfig(n_urls=700, n_periods=12, seed=21)
    clean, _ = generate_dataset(cfg, ZERO)
    noisy, _ = generate_dataset(cfg, NoiseSpec())
    assert len(noisy) >= 100_000
    assert np.std(noisy.views - clean.views) == pytest.approx(2228.0, rel=0.05)
    sd = np.std(noisy.counts - clean.counts, axis=0)
    np.testing.assert_allclose(sd, [22, 10, 10, 10, 10, 10], rtol=0.05)


def test_noisy_table_can_hold_negative_values():
    cfg = DatagenConfig(n_urls=50, n_periods=1, seed=2)
    table, _ = generate_dataset(cfg, NoiseSpec())
    assert table.counts.min() < 0


def test_ground_truth_probabilities_are_mutually_exclusive():
    _, truth = generate_dataset(DatagenConfig(n_urls=10_000, n_periods=1, n_groups=1, seed=4), NoiseSpec())
    assert truth.beta_true.min() >= 0
    assert truth.beta_true.sum(axis=1).max() <= 1.0


@pytest.mark.slow
def test_anchor_counts_track_latent_value():
    table, truth = generate_dataset(DatagenConfig(n_urls=10_000, n_periods=1, seed=6), NoiseSpec())
    loves = _url_totals(table, table.counts[:, BEHAVIORS.index("loves")])
    assert np.corrcoef(loves, truth.latent_value)[0, 1] > 0.2


def test_outcomes_move_with_latent_value():
    _, truth = generate_dataset(DatagenConfig(n_urls=4000, n_periods=1, n_groups=1, seed=5))
    high = truth.latent_value > 0
    assert truth.misinfo[high].mean() < truth.misinfo[~high].mean()
    assert np.corrcoef(truth.domain_quality, truth.latent_value)[0, 1] > 0.5


def test_table_layout():
    cfg = DatagenConfig(n_urls=7, n_periods=3, n_groups=4, seed=1)
    table, truth = generate_dataset(cfg)
    assert len(table) == 7 * 3 * 4
    keys = np.stack([table.url_id, table.period, table.group_id], axis=1)
    assert np.all(np.diff(keys[:, 0]) >= 0)
    assert len({tuple(k) for k in keys}) == len(table)
    assert set(table.periods.tolist()) == {0, 1, 2}
    np.testing.assert_array_equal(truth.url_id, np.arange(7))
    assert table.min_views == cfg.min_views


def test_same_seed_is_bit_identical_and_thread_independent():
    cfg = DatagenConfig(n_urls=60, n_periods=3, seed=99)
    a, ta = generate_dataset(cfg, threads=1)
    b, tb = generate_dataset(cfg, threads=4)
    for name in ("views", "counts"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
    assert ta.beta_true.tobytes() == tb.beta_true.tobytes()
    c, _ = generate_dataset(dataclasses.replace(cfg, seed=100))
    assert a.views.tobytes() != c.views.tobytes()


def test_url_streams_do_not_depend_on_url_count():
    small, _ = generate_dataset(DatagenConfig(n_urls=5, n_periods=2, seed=7))
    large, _ = generate_dataset(DatagenConfig(n_urls=9, n_periods=2, seed=7))
    np.testing.assert_array_equal(small.counts, large.counts[: len(small)])


@pytest.mark.parametrize(
    "kw",
    [
        {"n_urls": 0},
        {"n_periods": 0},
        {"n_groups": 0},
        {"base_rates": (0.5,) * 6},
        {"value_alignment": (1.0,)},
        {"view_scale": -1.0},
        {"view_sigma": -0.1},
    ],
)
def test_invalid_config(kw):
    with pytest.raises(ValidationError):
        DatagenConfig(**kw)


def test_negative_noise_rejected():
    with pytest.raises(ValidationError):
        NoiseSpec(-1.0, 1.0, 1.0)


def test_group_attributes_cover_every_cell():
    cells = {group_attributes(g) for g in range(60)}
    assert len(cells) == 60
    assert group_attributes(0) == ("18-24", "F", -2)
