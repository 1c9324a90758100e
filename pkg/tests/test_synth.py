"""Synthetic dataset generator: determinism, balance, round trips, null behavior."""

import math

import numpy as np
import pytest

from stgnn.errors import ConfigError
from stgnn.prep import load_manifest
from stgnn.synth import SynthConfig, generate, generate_dataset, signal_subset


def small_config(**overrides):
    base = dict(n_subjects=6, n_nodes=5, session_length=48, n_sessions=2,
                effect_size=1.0, seed=3)
    base.update(overrides)
    return SynthConfig(**base)


def test_generate_is_exactly_balanced():
    records = generate(small_config())
    labels = [r.label for r in records]
    assert labels.count(0) == labels.count(1) == 3


def test_generate_shapes_and_ids():
    records = generate(small_config())
    assert [r.subject_id for r in records] == [f"subj{i:04d}" for i in range(6)]
    for record in records:
        assert len(record.sessions) == 2
        assert all(s.shape == (48, 5) for s in record.sessions)


def test_generate_rejects_odd_subject_count():
    with pytest.raises(ConfigError):
        generate(small_config(n_subjects=5))


def test_generate_rejects_short_sessions():
    with pytest.raises(ConfigError):
        generate(small_config(session_length=16))


def test_signal_subset_is_fixed_per_seed():
    a = signal_subset(small_config())
    b = signal_subset(small_config())
    np.testing.assert_array_equal(a, b)
    assert len(a) == 1  # round(0.2 * 5)


def test_effect_zero_classes_identically_generated():
    records = generate(small_config(effect_size=0.0))
    # with no effect the per-subject generator ignores the label entirely:
    # regenerating subject 1's stream with label flipped changes nothing
    rng = np.random.default_rng(np.random.SeedSequence([3, 1, 1]))
    base = rng.standard_normal((48, 5))
    series = np.empty((48, 5))
    series[0] = base[0]
    for t in range(1, 48):
        series[t] = 0.3 * series[t - 1] + base[t]
    np.testing.assert_allclose(records[1].sessions[0], series.astype(np.float32))


def test_covariance_signal_correlates_subset_nodes():
    config = small_config(n_nodes=10, session_length=512, effect_size=1.0)
    subset = signal_subset(config)
    assert len(subset) == 2
    records = generate(config)
    pos = [r for r in records if r.label == 1]
    neg = [r for r in records if r.label == 0]
    pos_corr = np.mean([np.corrcoef(r.sessions[0][:, subset].T)[0, 1] for r in pos])
    neg_corr = np.mean([np.corrcoef(r.sessions[0][:, subset].T)[0, 1] for r in neg])
    assert pos_corr > 0.3
    assert abs(neg_corr) < 0.2


def test_covariance_latent_is_temporally_smooth():
    # the shared latent leaves a lag-1 signature on subset nodes well above
    # the 0.3 baseline, so the temporal encoders can see the covariance class
    config = small_config(n_nodes=10, session_length=512, effect_size=1.0)
    subset = signal_subset(config)
    records = generate(config)

    def lag1(series):
        return np.corrcoef(series[:-1], series[1:])[0, 1]

    pos = np.mean([lag1(r.sessions[0][:, subset[0]]) for r in records if r.label == 1])
    neg = np.mean([lag1(r.sessions[0][:, subset[0]]) for r in records if r.label == 0])
    assert pos > neg + 0.15


def test_spectral_signal_raises_autocorrelation():
    config = small_config(n_nodes=10, session_length=512, effect_size=1.0,
                          signal="spectral")
    subset = signal_subset(config)
    records = generate(config)

    def lag1(series):
        return np.corrcoef(series[:-1], series[1:])[0, 1]

    pos = np.mean([lag1(r.sessions[0][:, subset[0]]) for r in records if r.label == 1])
    neg = np.mean([lag1(r.sessions[0][:, subset[0]]) for r in records if r.label == 0])
    assert pos > neg + 0.15


def test_effect_zero_statistics_indistinguishable():
    # pooled over 20 seeds: per-subject node means and variances from both
    # classes come from the same distribution (two-sided z-test, p > 0.01)
    means = {0: [], 1: []}
    variances = {0: [], 1: []}
    for seed in range(20):
        for record in generate(small_config(effect_size=0.0, seed=seed)):
            data = np.concatenate([s.reshape(-1) for s in record.sessions])
            means[record.label].append(float(data.mean()))
            variances[record.label].append(float(data.var()))
    for stat in (means, variances):
        a = np.array(stat[0])
        b = np.array(stat[1])
        pooled = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
        z = (a.mean() - b.mean()) / pooled
        p = math.erfc(abs(z) / math.sqrt(2.0))
        assert p > 0.01


def test_dataset_files_round_trip(tmp_path):
    config = small_config()
    manifest = generate_dataset(config, tmp_path / "ds")
    records = load_manifest(manifest)
    expected = generate(config)
    assert [r.subject_id for r in records] == [r.subject_id for r in expected]
    assert [r.label for r in records] == [r.label for r in expected]
    for got, want in zip(records, expected):
        for a, b in zip(got.sessions, want.sessions):
            np.testing.assert_array_equal(a, b)


def test_dataset_csv_round_trip(tmp_path):
    manifest = generate_dataset(small_config(), tmp_path / "ds", fmt="csv")
    records = load_manifest(manifest)
    expected = generate(small_config())
    np.testing.assert_array_equal(records[0].sessions[0], expected[0].sessions[0])


def test_dataset_bytes_are_deterministic(tmp_path):
    m1 = generate_dataset(small_config(), tmp_path / "a")
    m2 = generate_dataset(small_config(), tmp_path / "b")
    assert m1.read_bytes() == m2.read_bytes()
    for f1 in sorted((tmp_path / "a" / "matrices").iterdir()):
        f2 = tmp_path / "b" / "matrices" / f1.name
        assert f1.read_bytes() == f2.read_bytes()
