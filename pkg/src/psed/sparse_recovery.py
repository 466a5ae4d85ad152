"""Greedy sparse recovery of the detection-error vector.

Implements single-path orthogonal matching pursuit and the multipath
tree search that keeps L child support candidates per surviving path,
deduplicates candidates that coincide as sets, and returns the
least-squares solution on the minimum-residual path.

Recovery operates on the scaled matrix A = sqrt(P) H so the pursuit
pseudocode applies verbatim; estimates are rescaled back to the
original system on output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, DimensionError, SingularMatrixError

LS = "LS"
LMMSE = "LMMSE"

_COND_LIMIT = 1e12
_RANK_TOL = 1e-12
DEFAULT_MAX_PATHS = 64


class SupportSet:
    """Ordered index set with order-insensitive equality.

    Indices are 0-based column indices into H. Selection order is
    preserved for inspection, but two supports compare equal whenever
    they contain the same indices.
    """

    __slots__ = ("indices",)

    def __init__(self, indices: Iterable[int] = ()):
        indices = tuple(int(i) for i in indices)
        if len(set(indices)) != len(indices):
            raise ConfigurationError(f"support contains duplicate indices: {indices}")
        if any(i < 0 for i in indices):
            raise ConfigurationError(f"support indices must be non-negative: {indices}")
        object.__setattr__(self, "indices", indices)

    def __setattr__(self, name, value):
        raise AttributeError("SupportSet is immutable")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices

    def __eq__(self, other) -> bool:
        if isinstance(other, SupportSet):
            return set(self.indices) == set(other.indices)
        if isinstance(other, (set, frozenset, tuple, list)):
            return set(self.indices) == set(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.indices))

    def __repr__(self) -> str:
        return f"SupportSet({list(self.indices)})"


@dataclass(frozen=True)
class RecoveryResult:
    """Sparse recovery output with its defining bookkeeping.

    e_hat is a full-length vector, zero off the support; residual_norm is
    the l2 norm of y' - sqrt(P) H_S e_hat_S; paths_explored counts every
    candidate path that received an estimate during the search.
    """

    support: SupportSet
    e_hat: np.ndarray = field(repr=False)
    residual_norm: float
    paths_explored: int
    iterations: int


def _as_indices(support) -> tuple[int, ...]:
    if isinstance(support, SupportSet):
        return support.indices
    return SupportSet(support).indices


def ls_on_support(H: np.ndarray, y_prime: np.ndarray, power: float, support) -> np.ndarray:
    """Least-squares estimate restricted to the given support.

    Returns (1/sqrt(P)) (H_S^H H_S)^-1 H_S^H y', scattered back onto a
    full-length vector. Solved by a rank-revealing factorization; the
    matching-pursuit callers keep their own incremental factorizations.
    """
    H = np.asarray(H, dtype=np.complex128)
    y_prime = np.asarray(y_prime, dtype=np.complex128)
    if H.shape[0] != y_prime.shape[0]:
        raise DimensionError(f"H has {H.shape[0]} rows but y' has length {y_prime.shape[0]}")
    idx = _as_indices(support)
    e_hat = np.zeros(H.shape[1], dtype=np.complex128)
    if not idx:
        return e_hat
    if len(idx) > H.shape[0]:
        raise ConfigurationError(f"support size {len(idx)} exceeds {H.shape[0]} measurements")
    A_s = np.sqrt(power) * H[:, list(idx)]
    if np.linalg.cond(A_s) > _COND_LIMIT:
        raise SingularMatrixError(f"rank-deficient submatrix on support {list(idx)}")
    coef, _, _, _ = np.linalg.lstsq(A_s, y_prime, rcond=None)
    e_hat[list(idx)] = coef
    return e_hat


def lmmse_on_support(
    H: np.ndarray,
    y_prime: np.ndarray,
    power: float,
    support,
    error_var: float,
    noise_var: float,
) -> np.ndarray:
    """Regularized (LMMSE) estimate restricted to the given support.

    Returns (1/sqrt(P)) (H_S^H H_S + (noise_var / (P error_var)) I)^-1 H_S^H y'.
    """
    if error_var <= 0:
        raise ConfigurationError(f"error_var must be positive, got {error_var}")
    if noise_var < 0:
        raise ConfigurationError(f"noise_var must be >= 0, got {noise_var}")
    H = np.asarray(H, dtype=np.complex128)
    y_prime = np.asarray(y_prime, dtype=np.complex128)
    idx = _as_indices(support)
    e_hat = np.zeros(H.shape[1], dtype=np.complex128)
    if not idx:
        return e_hat
    H_s = H[:, list(idx)]
    gram = H_s.conj().T @ H_s + (noise_var / (power * error_var)) * np.eye(len(idx))
    coef = np.linalg.solve(gram, H_s.conj().T @ y_prime) / np.sqrt(power)
    e_hat[list(idx)] = coef
    return e_hat


def _vnorm(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real) ** 0.5


def _grow(Q: np.ndarray, q: np.ndarray) -> np.ndarray:
    n_r, k = Q.shape
    out = np.empty((n_r, k + 1), dtype=np.complex128)
    out[:, :k] = Q
    out[:, k] = q
    return out


class _Path:
    """One support candidate with an incrementally maintained thin QR of A_S.

    The QR factors give the least-squares residual cheaply when the path
    is extended by one column; a second orthogonalization pass keeps Q
    numerically orthonormal along deep paths.
    """

    __slots__ = ("indices", "Q", "residual", "residual_norm")

    def __init__(self, indices: tuple[int, ...], Q: np.ndarray, residual: np.ndarray, residual_norm: float):
        self.indices = indices
        self.Q = Q
        self.residual = residual
        self.residual_norm = residual_norm

    @classmethod
    def root(cls, y_prime: np.ndarray) -> "_Path":
        n_r = y_prime.shape[0]
        return cls((), np.zeros((n_r, 0), dtype=np.complex128), y_prime.copy(), _vnorm(y_prime))

    def extend(self, A: np.ndarray, j: int) -> "_Path":
        a = A[:, j]
        QH = self.Q.conj().T
        w = a - self.Q @ (QH @ a)
        w = w - self.Q @ (QH @ w)
        norm_w = _vnorm(w)
        if norm_w <= _RANK_TOL * max(_vnorm(a), 1.0):
            raise SingularMatrixError(
                f"rank-deficient submatrix on support {sorted(self.indices + (j,))}"
            )
        q = w / norm_w
        residual = self.residual - q * np.vdot(q, self.residual)
        return _Path(self.indices + (j,), _grow(self.Q, q), residual, _vnorm(residual))


class _LmmsePath:
    """Path state for the regularized-estimator variant (direct solves)."""

    __slots__ = ("indices", "residual", "residual_norm")

    def __init__(self, indices: tuple[int, ...], residual: np.ndarray, residual_norm: float):
        self.indices = indices
        self.residual = residual
        self.residual_norm = residual_norm

    @classmethod
    def root(cls, y_prime: np.ndarray) -> "_LmmsePath":
        return cls((), y_prime.copy(), float(np.linalg.norm(y_prime)))


def _extend_block(path: "_Path", A: np.ndarray, columns: list[int]) -> list["_Path"]:
    """Extend one parent by several columns, sharing the projection products."""
    if not columns:
        return []
    cols = A[:, columns]
    QH = path.Q.conj().T
    W = cols - path.Q @ (QH @ cols)
    W -= path.Q @ (QH @ W)
    norms = np.linalg.norm(W, axis=0)
    col_norms = np.linalg.norm(cols, axis=0)
    children = []
    for t, j in enumerate(columns):
        if norms[t] <= _RANK_TOL * max(col_norms[t], 1.0):
            raise SingularMatrixError(
                f"rank-deficient submatrix on support {sorted(path.indices + (j,))}"
            )
        q = np.ascontiguousarray(W[:, t]) / norms[t]
        residual = path.residual - q * np.vdot(q, path.residual)
        children.append(_Path(path.indices + (j,), _grow(path.Q, q), residual, _vnorm(residual)))
    return children


def _best_indices(corr: np.ndarray, count: int, exclude: tuple[int, ...]) -> list[int]:
    """Indices of the `count` largest correlations, ties toward lower index."""
    masked = corr.copy()
    if exclude:
        masked[list(exclude)] = -np.inf
    order = np.lexsort((np.arange(masked.shape[0]), -masked))
    picked = []
    for j in order[: count + len(exclude)]:
        if masked[j] == -np.inf:
            continue
        picked.append(int(j))
        if len(picked) == count:
            break
    return picked


def _resolve_tol(tol: float | None, y_norm: float) -> float:
    if tol is None:
        return 1e-9 * y_norm
    if tol < 0:
        raise ConfigurationError(f"tol must be >= 0, got {tol}")
    return float(tol)


def _finalize(
    H: np.ndarray,
    y_prime: np.ndarray,
    power: float,
    indices: tuple[int, ...],
    paths_explored: int,
    iterations: int,
    estimator: str,
    error_var: float | None,
    noise_var: float | None,
) -> RecoveryResult:
    """Re-solve on the winning support and package the result."""
    support = SupportSet(indices)
    if estimator == LS:
        e_hat = ls_on_support(H, y_prime, power, support)
    else:
        e_hat = lmmse_on_support(H, y_prime, power, support, error_var, noise_var)
    residual = y_prime - np.sqrt(power) * (H @ e_hat)
    return RecoveryResult(
        support=support,
        e_hat=e_hat,
        residual_norm=float(np.linalg.norm(residual)),
        paths_explored=paths_explored,
        iterations=iterations,
    )


def _check_pursuit_args(H: np.ndarray, y_prime: np.ndarray, K: int) -> None:
    if H.shape[0] != y_prime.shape[0]:
        raise DimensionError(f"H has {H.shape[0]} rows but y' has length {y_prime.shape[0]}")
    if K < 1:
        raise ConfigurationError(f"sparsity K must be >= 1, got {K}")
    if K > H.shape[1]:
        raise ConfigurationError(f"sparsity K={K} exceeds the {H.shape[1]} available columns")


def omp(H: np.ndarray, y_prime: np.ndarray, power: float, K: int, tol: float | None = None) -> RecoveryResult:
    """Orthogonal matching pursuit for at most K iterations.

    Each iteration appends the not-yet-selected column most correlated
    with the residual, re-solves least squares on the accumulated
    support, and stops early once the residual norm drops to `tol`
    (default 1e-9 times the norm of y').
    """
    H = np.asarray(H, dtype=np.complex128)
    y_prime = np.asarray(y_prime, dtype=np.complex128)
    _check_pursuit_args(H, y_prime, K)
    A = np.sqrt(power) * H
    AH = A.conj().T
    tol_eff = _resolve_tol(tol, float(np.linalg.norm(y_prime)))

    path = _Path.root(y_prime)
    iterations = 0
    for _ in range(K):
        if path.residual_norm <= tol_eff:
            break
        corr = np.abs(AH @ path.residual) ** 2
        j = _best_indices(corr, 1, path.indices)[0]
        path = path.extend(A, j)
        iterations += 1
    return _finalize(H, y_prime, power, path.indices, iterations, iterations, LS, None, None)


def _extend_lmmse(
    path: _LmmsePath,
    H: np.ndarray,
    y_prime: np.ndarray,
    power: float,
    j: int,
    error_var: float,
    noise_var: float,
) -> _LmmsePath:
    indices = path.indices + (j,)
    e_hat = lmmse_on_support(H, y_prime, power, indices, error_var, noise_var)
    residual = y_prime - np.sqrt(power) * (H @ e_hat)
    return _LmmsePath(indices, residual, float(np.linalg.norm(residual)))


def mmp(
    H: np.ndarray,
    y_prime: np.ndarray,
    power: float,
    K: int,
    L: int,
    tol: float | None = None,
    max_paths: int = DEFAULT_MAX_PATHS,
    estimator: str = LS,
    error_var: float | None = None,
    noise_var: float | None = None,
) -> RecoveryResult:
    """Multipath matching pursuit: breadth-first search over support candidates.

    Every surviving path spawns up to L children from the columns most
    correlated with its residual; children that coincide (as sets) with a
    path already created in the layer are dropped. After K layers the
    minimum-residual path wins and its estimate is re-solved on the full
    support. When a layer exceeds `max_paths` candidates only the
    smallest-residual paths survive. With L = 1 the search degenerates to
    `omp` and returns identical output.

    The default estimator solves least squares per path; `estimator="LMMSE"`
    (requires `error_var` and `noise_var`) applies the regularized solve
    instead, both along the paths and in the final re-solve.
    """
    H = np.asarray(H, dtype=np.complex128)
    y_prime = np.asarray(y_prime, dtype=np.complex128)
    _check_pursuit_args(H, y_prime, K)
    if L < 1:
        raise ConfigurationError(f"branch count L must be >= 1, got {L}")
    if max_paths < 1:
        raise ConfigurationError(f"max_paths must be >= 1, got {max_paths}")
    if estimator not in (LS, LMMSE):
        raise ConfigurationError(f"unknown estimator {estimator!r}; expected LS or LMMSE")
    if estimator == LMMSE and (error_var is None or noise_var is None):
        raise ConfigurationError("estimator='LMMSE' requires error_var and noise_var")

    A = np.sqrt(power) * H
    AH = A.conj().T
    tol_eff = _resolve_tol(tol, float(np.linalg.norm(y_prime)))

    if estimator == LS:
        paths: list = [_Path.root(y_prime)]
        extend = lambda p, j: p.extend(A, j)  # noqa: E731
    else:
        paths = [_LmmsePath.root(y_prime)]
        extend = lambda p, j: _extend_lmmse(p, H, y_prime, power, j, error_var, noise_var)  # noqa: E731

    paths_explored = 0
    iterations = 0
    for _ in range(K):
        if min(p.residual_norm for p in paths) <= tol_eff:
            break
        seen: set[frozenset] = set()
        children: list = []
        if len(paths) == 1 or estimator == LMMSE:
            # Scalar route; with L = 1 this is exactly the omp update sequence.
            for path in paths:
                corr = np.abs(AH @ path.residual) ** 2
                for j in _best_indices(corr, L, path.indices):
                    key = frozenset(path.indices) | {j}
                    if key in seen:
                        continue
                    seen.add(key)
                    children.append(extend(path, j))
                    paths_explored += 1
        else:
            # Batched route: one correlation product and one stable sort for
            # the whole layer, then per-parent block QR extensions.
            residuals = np.stack([p.residual for p in paths], axis=1)
            corr = np.abs(AH @ residuals) ** 2
            for pi, path in enumerate(paths):
                if path.indices:
                    corr[list(path.indices), pi] = -np.inf
            order = np.argsort(-corr, axis=0, kind="stable")
            for pi, path in enumerate(paths):
                cand = []
                for j in order[: L + len(path.indices), pi]:
                    if corr[j, pi] == -np.inf:
                        continue
                    cand.append(int(j))
                    if len(cand) == L:
                        break
                fresh = []
                for j in cand:
                    key = frozenset(path.indices) | {j}
                    if key not in seen:
                        seen.add(key)
                        fresh.append(j)
                children.extend(_extend_block(path, A, fresh))
                paths_explored += len(fresh)
        if len(children) > max_paths:
            keep = sorted(range(len(children)), key=lambda i: (children[i].residual_norm, i))
            children = [children[i] for i in keep[:max_paths]]
        paths = children
        iterations += 1

    best = min(range(len(paths)), key=lambda i: (paths[i].residual_norm, i))
    return _finalize(
        H, y_prime, power, paths[best].indices, paths_explored, iterations, estimator, error_var, noise_var
    )
