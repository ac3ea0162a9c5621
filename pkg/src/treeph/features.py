"""Feature vectors from diagrams, and total-length controls."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .diagram import PersistenceDiagram
from .errors import DegenerateError


@dataclass
class FeatureVector:
    values: np.ndarray
    n: int
    N: int
    dim: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != self.N - self.n + 1:
            raise ValueError("feature length does not match its window")


def sorted_persistences(diagram: PersistenceDiagram) -> np.ndarray:
    """Finite persistences in descending order; equal values ordered by (birth, death)."""
    fin = diagram.finite().dots
    pers = fin[:, 1] - fin[:, 0]
    order = np.lexsort((fin[:, 1], fin[:, 0], -pers))
    return pers[order]


def persistence_vector(diagram: PersistenceDiagram, n: int = 1, N: int = 100) -> FeatureVector:
    """Ranks ``n..N`` (1-based, inclusive) of the descending persistences.

    Ranks past the number of finite dots are zero; essential dots never
    count.
    """
    if n < 1 or N < n:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    pers = sorted_persistences(diagram)
    out = np.zeros(N - n + 1)
    window = pers[n - 1:N]
    out[:len(window)] = window
    return FeatureVector(out, n, N, diagram.dim)


def feature_matrix(diagrams, n=1, N=100) -> np.ndarray:
    """Stack ``persistence_vector`` over a cohort into a subjects x ranks array."""
    return np.array([persistence_vector(d, n, N).values for d in diagrams]).reshape(len(diagrams), N - n + 1)


def residualize(features, lengths) -> np.ndarray:
    """Residuals of an ordinary least-squares fit of each feature on length.

    ``features`` is subjects x features (or a single column); each column is
    regressed on ``[1, L]`` across subjects independently.
    """
    P = np.asarray(features, dtype=float)
    squeeze = P.ndim == 1
    P = P.reshape(len(P), -1)
    L = np.asarray(lengths, dtype=float)
    if len(L) != len(P):
        raise ValueError("one length per subject is required")
    if len(L) < 3:
        raise ValueError("residualize needs at least 3 subjects")
    Lc = L - L.mean()
    if np.allclose(Lc, 0.0, rtol=0.0, atol=1e-12 * max(1.0, abs(L.mean()))):
        raise DegenerateError("all total lengths are equal; regression on length is undefined")
    X = np.column_stack([np.ones_like(L), Lc])
    beta, *_ = np.linalg.lstsq(X, P, rcond=None)
    R = P - X @ beta
    return R[:, 0] if squeeze else R


def scale_by_length(features, L, exponent=1.0):
    """Divide features by ``L ** exponent`` (exponent 1, 1/2 or 1/3 in practice).

    Accepts a single vector with a scalar ``L`` or a subjects x features
    matrix with one ``L`` per subject.
    """
    L = np.asarray(L, dtype=float)
    if np.any(L <= 0):
        raise ValueError("total length must be positive")
    if isinstance(features, FeatureVector):
        return FeatureVector(features.values / float(L) ** exponent, features.n, features.N, features.dim)
    P = np.asarray(features, dtype=float)
    if L.ndim == 0:
        return P / float(L) ** exponent
    return P / (L ** exponent).reshape(-1, *([1] * (P.ndim - 1)))


LENGTH_EXPONENTS = {"L": 1.0, "sqrtL": 0.5, "cbrtL": 1.0 / 3.0}


def features_to_csv(subject_ids, matrix, n, N, dim=None) -> str:
    out = io.StringIO()
    out.write(f"# window n={n} N={N}" + (f" dim={dim}" if dim is not None else "") + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["subject_id"] + [f"f_{i}" for i in range(n, N + 1)])
    for sid, row in zip(subject_ids, np.asarray(matrix)):
        w.writerow([sid] + [repr(float(x)) for x in row])
    return out.getvalue()


def read_features_csv(text):
    """Inverse of :func:`features_to_csv`; returns ``(ids, matrix, n, N)``."""
    lines = text.splitlines()
    n = N = None
    body = []
    for line in lines:
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("n="):
                    n = int(tok[2:])
                elif tok.startswith("N="):
                    N = int(tok[2:])
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], rows[1:]
    if n is None:
        n, N = int(header[1][2:]), int(header[-1][2:])
    ids = [r[0] for r in data]
    M = np.array([[float(x) for x in r[1:]] for r in data]).reshape(len(data), len(header) - 1)
    return ids, M, n, N
