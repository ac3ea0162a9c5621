"""PCA, Pearson correlation, the mean-difference permutation test, heat maps."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import DegenerateError
from .features import feature_matrix


@dataclass
class PcaModel:
    mean: np.ndarray
    loadings: np.ndarray  # features x k, orthonormal columns
    scores: np.ndarray  # subjects x k
    variances: np.ndarray  # k, non-increasing
    total_variance: float = 0.0

    @property
    def explained_ratio(self):
        if self.total_variance <= 0:
            return np.zeros_like(self.variances)
        return self.variances / self.total_variance

    def reconstruct(self):
        return self.mean + self.scores @ self.loadings.T


@dataclass
class CorrelationResult:
    rho: float
    p_value: float
    n: int


@dataclass
class DiProPermResult:
    observed_stat: float
    permuted_stats: np.ndarray
    p_emp: float
    n_perm: int
    seed: int


@dataclass
class HeatGrid:
    kind: str
    N_max: int
    entries: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("n,N,value\n")
        for (n, N) in sorted(self.entries):
            out.write(f"{n},{N},{self.entries[(n, N)]!r}\n")
        return out.getvalue()

    def as_array(self):
        """N_max x N_max array indexed [n-1, N-1]; cells without a value are NaN."""
        A = np.full((self.N_max, self.N_max), np.nan)
        for (n, N), v in self.entries.items():
            A[n - 1, N - 1] = v
        return A


def pca(data, k=None) -> PcaModel:
    """Mean-centred PCA through the SVD of the centred data.

    Variances use the ``n - 1`` denominator, matching the sample covariance.
    Each loading is signed so its largest-magnitude entry is positive.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError("data must be subjects x features")
    n, p = X.shape
    if n < 2:
        raise ValueError("pca needs at least 2 subjects")
    kmax = min(n - 1, p)
    if k is None:
        k = kmax
    if not 1 <= k <= kmax:
        raise ValueError(f"k must lie in [1, {kmax}], got {k}")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    V = Vt[:k].T.copy()
    for j in range(k):
        col = V[:, j]
        # treat near-ties as ties so the sign choice is stable across platforms
        mags = np.round(np.abs(col), 12)
        if col[int(np.argmax(mags))] < 0:
            V[:, j] = -col
    variances = s[:k] ** 2 / (n - 1)
    total = float(np.sum(s ** 2) / (n - 1))
    return PcaModel(mean, V, Xc @ V, variances, total)


def pearson(x, y) -> CorrelationResult:
    """Pearson correlation with a two-sided t-test on ``n - 2`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be vectors of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("pearson needs at least 3 samples")
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(xc @ xc), np.sqrt(yc @ yc)
    scale_x = max(np.abs(x).max(), 1.0)
    scale_y = max(np.abs(y).max(), 1.0)
    if sx <= 1e-12 * scale_x * np.sqrt(n) or sy <= 1e-12 * scale_y * np.sqrt(n):
        raise DegenerateError("pearson correlation of a constant vector is undefined")
    rho = float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))
    df = n - 2
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * np.sqrt(df / (1.0 - rho * rho))
        p = float(2.0 * sps.t.sf(abs(t), df))
    return CorrelationResult(rho, p, n)


def pearson_p_value(rho, n):
    """Two-sided p-value of a Pearson ``rho`` from ``n`` samples."""
    if abs(rho) >= 1:
        return 0.0
    t = rho * np.sqrt((n - 2) / (1 - rho * rho))
    return float(2.0 * sps.t.sf(abs(t), n - 2))


def _mean_difference(X, in_a, n_a, n_b):
    sum_all = X.sum(axis=0)
    sum_a = in_a @ X
    mean_a = sum_a / n_a
    mean_b = (sum_all - sum_a) / n_b
    return np.linalg.norm(mean_a - mean_b, axis=-1)


def diproperm(A, B, n_perm=1000, seed=0) -> DiProPermResult:
    """Permutation test on the Euclidean distance between group means.

    Every permutation reassigns all subjects to groups of the original sizes.
    ``p_emp`` counts permuted statistics strictly above the observed one,
    divided by ``n_perm``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    A = A.reshape(len(A), -1)
    B = B.reshape(len(B), -1)
    if n_perm < 1:
        raise ValueError("n_perm must be at least 1")
    if len(A) < 2 or len(B) < 2:
        raise ValueError("each group needs at least 2 subjects")
    if A.shape[1] != B.shape[1]:
        raise ValueError("groups have different feature lengths")
    X = np.vstack([A, B])
    n_a, n_b = len(A), len(B)
    n = n_a + n_b
    observed = float(np.linalg.norm(A.mean(axis=0) - B.mean(axis=0)))

    rng = np.random.default_rng(seed)
    perms = np.argsort(rng.random((n_perm, n)), axis=1)
    in_a = np.zeros((n_perm, n))
    np.put_along_axis(in_a, perms[:, :n_a], 1.0, axis=1)
    permuted = _mean_difference(X, in_a, n_a, n_b)
    # tolerance so that relabelings with the identical split do not count as larger
    tol = 1e-12 * max(1.0, observed)
    count = int(np.sum(permuted > observed + tol))
    return DiProPermResult(observed, permuted, count / n_perm, n_perm, seed)


def cell_seed(seed, n, N):
    """Seed of the permutation stream for heat-map cell (n, N)."""
    return int(np.random.SeedSequence([int(seed), int(n), int(N)]).generate_state(1)[0])


def heatmap(diagrams, covariate, kind="age_rho", N_max=200, n_perm=1000, seed=0) -> HeatGrid:
    """Statistic over every feature window ``1 <= n < N <= N_max``.

    ``kind="age_rho"``: PC1 scores of the windowed vectors against the
    covariate, signed Pearson rho.  ``kind="sex_p"``: DiProPerm p-value
    between the two covariate labels.  Cells whose window holds no
    variation are NaN.
    """
    if N_max < 2:
        raise ValueError("N_max must be at least 2")
    full = feature_matrix(diagrams, 1, N_max)
    return heatmap_from_matrix(full, covariate, kind, n_perm, seed)


def heatmap_from_matrix(full, covariate, kind="age_rho", n_perm=1000, seed=0) -> HeatGrid:
    full = np.asarray(full, dtype=float)
    N_max = full.shape[1]
    cov = np.asarray(covariate)
    if len(cov) != len(full):
        raise ValueError("one covariate value per subject is required")
    grid = HeatGrid(kind, N_max)
    if kind == "age_rho":
        age = cov.astype(float)
        if np.ptp(age) == 0:
            raise DegenerateError("covariate is constant; no cell can be computed")
        for N in range(2, N_max + 1):
            for n in range(1, N):
                X = full[:, n - 1:N]
                try:
                    scores = pca(X, 1).scores[:, 0]
                    grid.entries[(n, N)] = pearson(scores, age).rho
                except DegenerateError:
                    grid.entries[(n, N)] = float("nan")
    elif kind == "sex_p":
        labels = sorted(set(cov.tolist()))
        if len(labels) != 2:
            raise DegenerateError(f"sex covariate needs exactly two labels, got {labels}")
        a = cov == labels[0]
        for N in range(2, N_max + 1):
            for n in range(1, N):
                X = full[:, n - 1:N]
                res = diproperm(X[a], X[~a], n_perm, cell_seed(seed, n, N))
                grid.entries[(n, N)] = res.p_emp
    else:
        raise ValueError(f"unknown heat-map kind {kind!r}")
    return grid


def read_heatgrid_csv(text, kind="", N_max=None) -> HeatGrid:
    entries = {}
    for line in text.splitlines()[1:]:
        if line.strip():
            n, N, v = line.split(",")
            entries[(int(n), int(N))] = float(v)
    if N_max is None:
        N_max = max((N for _, N in entries), default=0)
    return HeatGrid(kind, N_max, entries)
