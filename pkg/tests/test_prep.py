"""Preprocessing: scaling, windowing, shrinkage correlation graphs, balancing, IO."""

import numpy as np
import pytest

from stgnn.errors import ConfigError, ContractError, DataError
from stgnn.prep import (SubjectRecord, balance_by_subject,
                        covariance_to_correlation, ledoit_wolf_covariance, load_manifest,
                        prepare_graph_samples, read_matrix, robust_scale, threshold_edges,
                        window_adjacency, window_split, write_manifest, write_matrix_binary,
                        write_matrix_csv)


# robust scaling -----------------------------------------------------------------


def test_robust_scale_linear_ramp():
    np.testing.assert_allclose(robust_scale(np.array([1.0, 2, 3, 4, 5])),
                               [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_robust_scale_degenerate_iqr_gives_zeros():
    np.testing.assert_array_equal(robust_scale(np.array([7.0, 7, 7])), np.zeros(3))


def test_robust_scale_output_statistics():
    rng = np.random.default_rng(0)
    for _ in range(20):
        series = rng.normal(3.0, 2.5, size=rng.integers(5, 200))
        out = robust_scale(series)
        assert abs(np.quantile(out, 0.5)) < 1e-6
        q1, q3 = np.quantile(out, [0.25, 0.75])
        assert abs((q3 - q1) - 1.0) < 1e-6


def test_robust_scale_empty_raises():
    with pytest.raises(ContractError):
        robust_scale(np.array([]))


# windowing ---------------------------------------------------------------------


def _record(n_sessions=4, length=1200, nodes=5, label=0, sid="s0", seed=0):
    rng = np.random.default_rng(seed)
    sessions = [rng.normal(size=(length, nodes)).astype(np.float32)
                for _ in range(n_sessions)]
    return SubjectRecord(subject_id=sid, label=label, sessions=sessions)


def test_window_split_full_sessions():
    record = _record(length=1200, nodes=5)
    windows = window_split(record, windows_per_scan=1)
    assert len(windows) == 4
    assert all(w.features.shape == (5, 1200) for w in windows)
    assert [w.scan_index for w in windows] == [0, 1, 2, 3]


def test_window_split_sixteen_per_scan():
    record = _record(length=1200, nodes=3)
    windows = window_split(record, windows_per_scan=16)
    assert len(windows) == 64
    assert all(w.features.shape == (3, 75) for w in windows)


def test_window_split_is_a_partition():
    record = _record(n_sessions=1, length=8, nodes=2)
    windows = window_split(record, windows_per_scan=2)
    assert [w.window_index for w in windows] == [0, 1]
    session = record.sessions[0]
    for w in windows:
        raw_block = session[w.window_index * 4:(w.window_index + 1) * 4, :].T
        expected = np.vstack([robust_scale(row) for row in raw_block])
        np.testing.assert_allclose(w.features, expected.astype(np.float32), rtol=1e-6)


def test_window_split_rejects_indivisible_length():
    with pytest.raises(ConfigError):
        window_split(_record(length=10), windows_per_scan=3)


def test_window_features_are_scaled_per_node():
    windows = window_split(_record(length=100, nodes=4), windows_per_scan=2)
    for w in windows:
        for row in w.features:
            assert abs(np.quantile(row.astype(np.float64), 0.5)) < 1e-5


# Ledoit-Wolf -------------------------------------------------------------------


def ledoit_wolf_oracle(data):
    """Direct textbook formula with explicit per-observation loops."""
    t, n = data.shape
    xc = data - data.mean(axis=0)
    s = np.zeros((n, n))
    for k in range(t):
        s += np.outer(xc[k], xc[k])
    s /= t
    m = np.trace(s) / n
    d2 = ((s - m * np.eye(n)) ** 2).sum() / n
    if d2 == 0.0:
        return s, 0.0
    b_bar2 = 0.0
    for k in range(t):
        b_bar2 += ((np.outer(xc[k], xc[k]) - s) ** 2).sum()
    b_bar2 /= t * t * n
    b2 = min(b_bar2, d2)
    rho = b2 / d2
    return rho * m * np.eye(n) + (1.0 - rho) * s, rho


def test_ledoit_wolf_identity_target_is_fixed_point():
    # empirical covariance exactly m*I: orthogonal, equal-variance columns
    data = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    out = ledoit_wolf_covariance(data)
    np.testing.assert_allclose(out, np.eye(2), atol=1e-12)


def test_ledoit_wolf_single_node_is_sample_variance():
    data = np.array([[1.0], [2.0], [4.0]])
    out = ledoit_wolf_covariance(data)
    expected = np.var(data[:, 0])  # divisor T
    np.testing.assert_allclose(out, [[expected]], atol=1e-12)


def test_ledoit_wolf_matches_independent_oracle():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        scale = np.diag(rng.uniform(0.5, 2.0, size=5))
        data = rng.normal(size=(500, 5)) @ scale
        ours = ledoit_wolf_covariance(data)
        expected, rho = ledoit_wolf_oracle(data)
        np.testing.assert_allclose(ours, expected, atol=1e-10)
        assert 0.0 <= rho <= 1.0


def test_ledoit_wolf_output_is_symmetric_psd():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        data = rng.normal(size=(40, 6))
        out = ledoit_wolf_covariance(data)
        np.testing.assert_array_equal(out, out.T)
        assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_ledoit_wolf_requires_two_rows():
    with pytest.raises(ContractError):
        ledoit_wolf_covariance(np.ones((1, 3)))


# correlation -------------------------------------------------------------------


def test_correlation_of_diagonal_covariance_is_identity():
    np.testing.assert_allclose(covariance_to_correlation(np.diag([4.0, 9.0])), np.eye(2))


def test_correlation_fixed_point():
    c = np.array([[1.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(covariance_to_correlation(c), c)


def test_correlation_unit_diagonal_and_symmetry():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6))
    spd = a @ a.T + 6 * np.eye(6)
    corr = covariance_to_correlation(spd)
    np.testing.assert_array_equal(np.diag(corr), np.ones(6))
    np.testing.assert_allclose(corr, corr.T)
    assert np.all(np.abs(corr) <= 1.0 + 1e-12)


def test_correlation_rejects_nonpositive_diagonal():
    with pytest.raises(ContractError):
        covariance_to_correlation(np.array([[0.0, 0.0], [0.0, 1.0]]))


# thresholding ------------------------------------------------------------------


def test_threshold_keeps_strongest_pair():
    corr = np.eye(3)
    corr[0, 1] = corr[1, 0] = 0.9
    corr[0, 2] = corr[2, 0] = -0.5
    corr[1, 2] = corr[2, 1] = 0.1
    adj = threshold_edges(corr, percent=100 / 3)  # keep top 1 of 3
    assert adj.n_edges == 1
    np.testing.assert_array_equal(adj.edges, [[0], [1]])
    assert adj.dense[0, 1] == adj.dense[1, 0] == 1


def test_threshold_edge_counts_at_50_nodes():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(200, 50))
    corr = covariance_to_correlation(ledoit_wolf_covariance(a))
    assert threshold_edges(corr, 5).n_edges == 61    # floor(0.05 * 1225)
    assert threshold_edges(corr, 20).n_edges == 245  # floor(0.20 * 1225)


def test_threshold_full_percent_gives_complete_graph():
    corr = covariance_to_correlation(np.eye(4) + 0.1)
    adj = threshold_edges(corr, 100)
    np.testing.assert_array_equal(adj.dense, 1 - np.eye(4))


def test_threshold_tie_break_is_lexicographic():
    corr = np.eye(3)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        corr[i, j] = corr[j, i] = 0.5
    adj = threshold_edges(corr, percent=100 * 2 / 3)  # keep 2 of 3 equal pairs
    np.testing.assert_array_equal(adj.edges, [[0, 0], [1, 2]])


def test_threshold_invariants_random():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(4, 12))
        data = rng.normal(size=(50, n))
        corr = covariance_to_correlation(ledoit_wolf_covariance(data))
        percent = float(rng.choice([5, 20, 50]))
        adj = threshold_edges(corr, percent)
        np.testing.assert_array_equal(adj.dense, adj.dense.T)
        np.testing.assert_array_equal(np.diag(adj.dense), 0)
        expected = int(np.floor(percent / 100 * n * (n - 1) / 2))
        assert adj.n_edges == expected
        assert adj.dense.sum() == 2 * expected
        # edge list and dense view agree
        rebuilt = np.zeros_like(adj.dense)
        rebuilt[adj.edges[0], adj.edges[1]] = 1
        rebuilt[adj.edges[1], adj.edges[0]] = 1
        np.testing.assert_array_equal(rebuilt, adj.dense)


def test_threshold_rejects_bad_percent():
    with pytest.raises(ConfigError):
        threshold_edges(np.eye(3), 0)


# balancing ---------------------------------------------------------------------


def _light_records(n0, n1):
    recs = [SubjectRecord(f"a{i}", 0, []) for i in range(n0)]
    recs += [SubjectRecord(f"b{i}", 1, []) for i in range(n1)]
    return recs


def test_balance_produces_paper_scale_counts():
    balanced = balance_by_subject(_light_records(534, 469), seed=0)
    labels = [r.label for r in balanced]
    assert labels.count(0) == labels.count(1) == 469
    # 938 subjects -> 3752 samples at 4 windows, 60032 at 64 windows
    assert len(balanced) * 4 == 3752
    assert len(balanced) * 64 == 60032


def test_balance_keeps_already_balanced_input():
    records = _light_records(3, 3)
    assert balance_by_subject(records, seed=1) == records


def test_balance_is_deterministic_and_whole_subject():
    a = balance_by_subject(_light_records(10, 6), seed=42)
    b = balance_by_subject(_light_records(10, 6), seed=42)
    assert [r.subject_id for r in a] == [r.subject_id for r in b]
    assert len({r.subject_id for r in a}) == len(a)


def test_balance_requires_two_classes():
    with pytest.raises(ContractError):
        balance_by_subject([SubjectRecord("a", 0, [])], seed=0)


def test_prepare_graph_samples_end_to_end():
    records = [_record(n_sessions=2, length=64, nodes=6, label=i % 2, sid=f"s{i}", seed=i)
               for i in range(4)]
    samples = prepare_graph_samples(records, windows_per_scan=1, threshold_percent=20,
                                    balance_seed=0)
    assert len(samples) == 8
    for sample in samples:
        assert sample.features.shape == (6, 64)
        assert sample.adjacency.n_edges == int(0.2 * 15)
        np.testing.assert_array_equal(sample.adjacency.dense, sample.adjacency.dense.T)


# file formats -------------------------------------------------------------------


def test_binary_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    matrix = rng.normal(size=(13, 7)).astype(np.float32)
    path = tmp_path / "m.bin"
    write_matrix_binary(path, matrix)
    np.testing.assert_array_equal(read_matrix(path), matrix)


def test_csv_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    matrix = rng.normal(size=(9, 4)).astype(np.float32)
    path = tmp_path / "m.csv"
    write_matrix_csv(path, matrix)
    np.testing.assert_array_equal(read_matrix(path), matrix)


def test_manifest_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    sessions = [rng.normal(size=(16, 3)).astype(np.float32) for _ in range(2)]
    for i, s in enumerate(sessions):
        write_matrix_binary(tmp_path / f"s{i}.bin", s)
    write_manifest(tmp_path / "manifest.json", n_nodes=3,
                   subjects=[{"id": "s0", "label": 1, "sessions": ["s0.bin", "s1.bin"]}])
    records = load_manifest(tmp_path / "manifest.json")
    assert len(records) == 1 and records[0].label == 1
    np.testing.assert_array_equal(records[0].sessions[0], sessions[0])


def test_manifest_rejects_missing_fields(tmp_path):
    (tmp_path / "manifest.json").write_text('{"version": 1}')
    with pytest.raises(DataError):
        load_manifest(tmp_path / "manifest.json")


def test_manifest_rejects_wrong_column_count(tmp_path):
    write_matrix_binary(tmp_path / "s.bin", np.zeros((4, 2), dtype=np.float32))
    write_manifest(tmp_path / "manifest.json", n_nodes=3,
                   subjects=[{"id": "x", "label": 0, "sessions": ["s.bin"]}])
    with pytest.raises(DataError):
        load_manifest(tmp_path / "manifest.json")


def test_read_matrix_rejects_garbage(tmp_path):
    (tmp_path / "bad.csv").write_text("not,a;number\n")
    with pytest.raises(DataError):
        read_matrix(tmp_path / "bad.csv")
