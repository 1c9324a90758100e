"""Turn raw per-subject node timeseries into balanced, windowed graph samples.

Pipeline: balance classes at the subject level, split sessions into
contiguous windows, robust-scale each node within each window, then derive
a binary adjacency per window from the shrinkage-correlation matrix so every
sample is self-contained (no statistics leak across windows or subjects).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError, DataError

MAGIC = b"STGM"
BINARY_VERSION = 1
MANIFEST_VERSION = 1


@dataclass
class SubjectRecord:
    """All sessions of one subject; rows are timesteps, columns are nodes."""

    subject_id: str
    label: int
    sessions: list[np.ndarray]


@dataclass
class SampleWindow:
    """One training sample: a nodes x timesteps feature matrix plus identity."""

    subject_id: str
    scan_index: int
    window_index: int
    label: int
    features: np.ndarray


@dataclass
class AdjacencyMatrix:
    """Symmetric binary adjacency with an equivalent undirected edge list."""

    n_nodes: int
    dense: np.ndarray
    edges: np.ndarray  # shape (2, E), each undirected edge listed once as i < j

    @property
    def n_edges(self) -> int:
        return self.edges.shape[1]


@dataclass
class GraphSample:
    window: SampleWindow
    adjacency: AdjacencyMatrix

    @property
    def features(self) -> np.ndarray:
        return self.window.features

    @property
    def label(self) -> int:
        return self.window.label

    @property
    def subject_id(self) -> str:
        return self.window.subject_id


# scaling and windowing -------------------------------------------------------


def robust_scale(series: np.ndarray) -> np.ndarray:
    """(x - median) / IQR with linear-interpolation quartiles.

    A degenerate IQR of zero maps the series to all zeros.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.size == 0:
        raise ContractError("robust_scale expects a non-empty 1D series")
    median = np.quantile(series, 0.5)
    q1, q3 = np.quantile(series, [0.25, 0.75])
    iqr = q3 - q1
    if iqr == 0.0:
        return np.zeros_like(series)
    return (series - median) / iqr


def window_split(record: SubjectRecord, windows_per_scan: int) -> list[SampleWindow]:
    """Cut every session into contiguous non-overlapping windows.

    Each window is transposed to nodes x timesteps and robust-scaled per
    node, so samples are self-contained.
    """
    if windows_per_scan < 1:
        raise ConfigError("windows_per_scan must be >= 1")
    out: list[SampleWindow] = []
    for scan_index, session in enumerate(record.sessions):
        length = session.shape[0]
        if length % windows_per_scan != 0:
            raise ConfigError(
                f"session length {length} is not divisible by windows_per_scan={windows_per_scan}")
        width = length // windows_per_scan
        for w in range(windows_per_scan):
            block = session[w * width:(w + 1) * width, :].T  # nodes x timesteps
            scaled = np.vstack([robust_scale(row) for row in block]).astype(np.float32)
            out.append(SampleWindow(subject_id=record.subject_id, scan_index=scan_index,
                                    window_index=w, label=record.label, features=scaled))
    return out


# correlation graphs ----------------------------------------------------------


def ledoit_wolf_covariance(data: np.ndarray) -> np.ndarray:
    """Shrinkage covariance rho*m*I + (1-rho)*S from a T x N data matrix.

    S is the empirical covariance with divisor T, m = trace(S)/N, and rho is
    the analytically optimal shrinkage intensity in [0, 1].
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ContractError("ledoit_wolf_covariance expects a T x N matrix")
    t, n = data.shape
    if t < 2:
        raise ContractError("need at least two observations")
    xc = data - data.mean(axis=0)
    emp = xc.T @ xc / t
    m = np.trace(emp) / n
    d2 = ((emp - m * np.eye(n)) ** 2).sum() / n
    if d2 == 0.0:
        return emp
    x2 = xc * xc
    b_bar2 = ((x2.T @ x2) / t - emp * emp).sum() / (t * n)
    b2 = min(b_bar2, d2)
    rho = b2 / d2
    out = rho * m * np.eye(n) + (1.0 - rho) * emp
    return (out + out.T) / 2.0


def covariance_to_correlation(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=np.float64)
    diag = np.diag(cov)
    if np.any(diag <= 0):
        raise ContractError("covariance diagonal must be strictly positive")
    scale = np.sqrt(diag)
    corr = cov / np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    return corr


def threshold_edges(corr: np.ndarray, percent: float) -> AdjacencyMatrix:
    """Keep the strongest percent of off-diagonal pairs by |r|, binarized.

    Keeps floor(percent/100 * N(N-1)/2) pairs; ties break on ascending
    (i, j). Output is symmetric with a zero diagonal.
    """
    if not 0.0 < percent <= 100.0:
        raise ConfigError(f"threshold percent must lie in (0, 100]; got {percent}")
    corr = np.asarray(corr, dtype=np.float64)
    n = corr.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    strength = np.abs(corr[ii, jj])
    keep = int(np.floor(percent / 100.0 * ii.size))
    order = np.lexsort((jj, ii, -strength))
    chosen = order[:keep]
    dense = np.zeros((n, n), dtype=np.float32)
    dense[ii[chosen], jj[chosen]] = 1.0
    dense[jj[chosen], ii[chosen]] = 1.0
    edges = np.vstack([ii[chosen], jj[chosen]]).astype(np.int64)
    return AdjacencyMatrix(n_nodes=n, dense=dense, edges=edges)


def window_adjacency(window: SampleWindow, percent: float) -> AdjacencyMatrix:
    """Adjacency of one sample from its own (scaled) window."""
    corr = covariance_to_correlation(ledoit_wolf_covariance(window.features.T))
    return threshold_edges(corr, percent)


def window_correlation(window: SampleWindow) -> np.ndarray:
    return covariance_to_correlation(ledoit_wolf_covariance(window.features.T))


# class balancing --------------------------------------------------------------


def balance_by_subject(records: list[SubjectRecord], seed: int) -> list[SubjectRecord]:
    """Randomly drop whole subjects from the dominant class until counts match."""
    by_class: dict[int, list[int]] = {}
    for idx, rec in enumerate(records):
        by_class.setdefault(rec.label, []).append(idx)
    if len(by_class) != 2 or any(len(v) == 0 for v in by_class.values()):
        raise ContractError("balancing needs two non-empty classes")
    (label_a, idx_a), (label_b, idx_b) = sorted(by_class.items())
    if len(idx_a) == len(idx_b):
        return list(records)
    majority = idx_a if len(idx_a) > len(idx_b) else idx_b
    surplus = abs(len(idx_a) - len(idx_b))
    rng = np.random.default_rng(seed)
    dropped = set(rng.choice(majority, size=surplus, replace=False).tolist())
    return [rec for idx, rec in enumerate(records) if idx not in dropped]


def prepare_graph_samples(records: list[SubjectRecord], windows_per_scan: int,
                          threshold_percent: float, balance_seed: int) -> list[GraphSample]:
    """Full preprocessing: balance, window, scale, per-window adjacency."""
    balanced = balance_by_subject(records, seed=balance_seed)
    samples: list[GraphSample] = []
    for record in balanced:
        for window in window_split(record, windows_per_scan):
            samples.append(GraphSample(window=window,
                                       adjacency=window_adjacency(window, threshold_percent)))
    return samples


def stack_samples(samples: list[GraphSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str]]:
    """Stack a homogeneous sample list into (features, adjacency, labels, subjects)."""
    features = np.stack([s.features for s in samples]).astype(np.float32)
    adjacency = np.stack([s.adjacency.dense for s in samples]).astype(np.float32)
    labels = np.array([s.label for s in samples], dtype=np.float32)
    subjects = [s.subject_id for s in samples]
    return features, adjacency, labels, subjects


# dataset files -----------------------------------------------------------------


def write_matrix_binary(path: Path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    rows, cols = matrix.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", BINARY_VERSION))
        fh.write(struct.pack("<II", rows, cols))
        fh.write(matrix.tobytes())


def write_matrix_csv(path: Path, matrix: np.ndarray) -> None:
    # %.9g round-trips float32 exactly through decimal text
    np.savetxt(path, np.asarray(matrix, dtype=np.float32), delimiter=",", fmt="%.9g")


def read_matrix(path: Path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == MAGIC:
            version, = struct.unpack("<H", fh.read(2))
            if version != BINARY_VERSION:
                raise DataError(f"unsupported matrix file version {version} in {path}")
            rows, cols = struct.unpack("<II", fh.read(8))
            payload = fh.read(rows * cols * 4)
            if len(payload) != rows * cols * 4:
                raise DataError(f"truncated matrix file {path}")
            return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)
    try:
        matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DataError(f"cannot parse {path} as CSV timeseries: {exc}") from None
    return matrix.astype(np.float32)


def write_manifest(path: Path, n_nodes: int, subjects: list[dict]) -> None:
    doc = {"version": MANIFEST_VERSION, "n_nodes": n_nodes, "subjects": subjects}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_manifest(path: Path) -> list[SubjectRecord]:
    """Read a dataset manifest and all session matrices it references."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from None
    for key in ("version", "n_nodes", "subjects"):
        if key not in doc:
            raise DataError(f"manifest {path} is missing required field {key!r}")
    if doc["version"] != MANIFEST_VERSION:
        raise DataError(f"unsupported manifest version {doc['version']}")
    n_nodes = int(doc["n_nodes"])
    base = path.parent
    records: list[SubjectRecord] = []
    for entry in doc["subjects"]:
        for key in ("id", "label", "sessions"):
            if key not in entry:
                raise DataError(f"subject entry missing field {key!r} in {path}")
        if entry["label"] not in (0, 1):
            raise DataError(f"subject {entry['id']}: label must be 0 or 1")
        sessions = []
        for rel in entry["sessions"]:
            matrix = read_matrix(base / rel)
            if matrix.shape[1] != n_nodes:
                raise DataError(f"{rel}: expected {n_nodes} columns, found {matrix.shape[1]}")
            sessions.append(matrix)
        records.append(SubjectRecord(subject_id=str(entry["id"]), label=int(entry["label"]),
                                     sessions=sessions))
    return records
