"""Row-stochastic k-sparse similarity graph and its spectral machinery.

Each row of S solves, on the probability simplex,

    min_s  sum_j (w_j s_j + mu_i s_j^2)

whose KKT solution is s_j = max(0, alpha_i - w_j / (2 mu_i)) with the row-wise

    mu_i = (k/2) w_(k+1) - (1/2) sum_{p<=k} w_(p),
    alpha_i = 1/k + sum_{p<=k} w_(p) / (2 k mu_i),

so exactly the k nearest neighbors receive positive weight (ties at the
boundary receive an exact zero).  Cluster structure is read off the
symmetrized graph: the number of connected components equals the
multiplicity of the Laplacian's zero eigenvalue.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.csgraph

from .errors import DomainError, NumericalError

#: symmetrized entries at or below this are treated as absent edges
ZERO_TOL = 1e-12


@dataclass
class SimilarityState:
    """Learned graph bundle: row-sparse S plus the penalty bookkeeping."""

    matrix: scipy.sparse.csr_matrix
    k: int
    lam: float
    mu: float  # mean of the per-row mu_i
    mu_rows: np.ndarray


def update_row(w, k):
    """Closed-form row update.

    w : (m,) distances from this unit to the m candidate neighbors (self excluded).
    Returns (s, mu_i, alpha_i); s has the same length as w, sums to 1, and puts
    positive mass on the k nearest entries only.  Degenerate rows (mu_i <= 0,
    i.e. the k nearest all tie with the (k+1)-th) fall back to uniform 1/k mass
    on the k nearest.  Ties are broken by a stable sort on (distance, index).
    """
    w = np.asarray(w, dtype=float)
    m = w.shape[0]
    if not 0 < k < m:
        raise DomainError(f"need 0 < k < {m}, got k={k}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError("distances must be finite and nonnegative")
    order = np.argsort(w, kind="stable")
    head = order[: k + 1]
    wh = w[head]
    top = wh[k]  # w_(k+1)
    mu_i = 0.5 * (k * top - np.sum(wh[:k]))
    s = np.zeros(m)
    if mu_i <= 0:
        s[head[:k]] = 1.0 / k
        alpha_i = np.inf
    else:
        alpha_i = top / (2.0 * mu_i)
        s[head[:k]] = (top - wh[:k]) / (2.0 * mu_i)
    return s, float(mu_i), float(alpha_i)


def update_similarity(eta, embedding, lam, k):
    """Rebuild every row of S from combined distances
    w_ab = (eta_a - eta_b)^2 + lam * ||f_a - f_b||^2.

    Returns a SimilarityState whose mu is the mean of the per-row mu_i
    (degenerate rows contribute their computed value).
    """
    eta = np.asarray(eta, dtype=float)
    n = eta.shape[0]
    w = (eta[:, None] - eta[None, :]) ** 2
    if lam != 0:
        sq = np.sum(embedding**2, axis=1)
        cross = embedding @ embedding.T
        fd = sq[:, None] + sq[None, :] - 2.0 * cross
        np.maximum(fd, 0.0, out=fd)
        w += lam * fd
    np.fill_diagonal(w, np.inf)  # self-loops excluded

    indptr = np.arange(0, (n + 1) * k, k)
    indices = np.empty(n * k, dtype=np.intp)
    values = np.empty(n * k)
    mu_rows = np.empty(n)
    for i in range(n):
        row = w[i]
        order = np.argsort(row, kind="stable")
        head = order[: k + 1]
        wh = row[head]
        top = wh[k]
        mu_i = 0.5 * (k * top - np.sum(wh[:k]))
        mu_rows[i] = mu_i
        cols = head[:k]
        if mu_i <= 0:
            vals = np.full(k, 1.0 / k)
        else:
            vals = (top - wh[:k]) / (2.0 * mu_i)
        # store in ascending column order so the CSR layout is canonical
        col_order = np.argsort(cols, kind="stable")
        indices[i * k : (i + 1) * k] = cols[col_order]
        values[i * k : (i + 1) * k] = vals[col_order]
    s = scipy.sparse.csr_matrix((values, indices, indptr), shape=(n, n))
    return SimilarityState(matrix=s, k=k, lam=float(lam), mu=float(np.mean(mu_rows)),
                           mu_rows=mu_rows)


def symmetrized(similarity):
    """(S + S') / 2 as CSR."""
    return (similarity + similarity.T) * 0.5


def laplacian(similarity):
    """Unnormalized graph Laplacian L = D - (S + S')/2, dense symmetric."""
    a = symmetrized(similarity).toarray()
    lap = -a
    lap[np.diag_indices_from(lap)] += a.sum(axis=1)
    return lap


def spectral_embed(lap, n_components):
    """Orthonormal eigenvectors of the n_components smallest eigenvalues of L."""
    n = lap.shape[0]
    if not 0 < n_components <= n:
        raise DomainError(f"need 0 < n_components <= {n}")
    try:
        eigvals, eigvecs = scipy.linalg.eigh(lap, subset_by_index=[0, n_components - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return eigvecs, eigvals


def connected_components(similarity, zero_tol=ZERO_TOL):
    """Component count and 1-based labels of the symmetrized graph.

    Edges are symmetrized entries strictly greater than zero_tol.
    """
    a = symmetrized(similarity).tocoo()
    keep = a.data > zero_tol
    adj = scipy.sparse.csr_matrix(
        (a.data[keep], (a.row[keep], a.col[keep])), shape=a.shape
    )
    count, labels = scipy.sparse.csgraph.connected_components(adj, directed=False)
    return count, labels + 1


def mean_abs_change(s_new, s_old):
    """mean |S_new - S_old| over all n^2 entries, structural zeros included."""
    n = s_new.shape[0]
    diff = s_new - s_old
    return float(np.abs(diff.data).sum()) / float(n * n)
