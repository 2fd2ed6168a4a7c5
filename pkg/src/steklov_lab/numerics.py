"""Sparse SPD factorization, Schur condensation and the dense pencil solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import InvalidArgument, NotSPD

MULTIPLET_RTOL = 1e-9


@dataclass(frozen=True)
class DofPartition:
    """Spectral (F), eliminated (E) and Dirichlet (D) vertex sets."""

    F: np.ndarray
    E: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        for name in ("F", "E", "D"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        if len(self.F) == 0:
            raise InvalidArgument("spectral set F is empty")
        allv = np.concatenate([self.F, self.E, self.D])
        if len(np.unique(allv)) != len(allv):
            raise InvalidArgument("F, E, D overlap")

    @property
    def n(self) -> int:
        return len(self.F) + len(self.E) + len(self.D)

    def check_covers(self, n: int) -> None:
        allv = np.sort(np.concatenate([self.F, self.E, self.D]))
        if len(allv) != n or np.any(allv != np.arange(n)):
            raise InvalidArgument("F, E, D do not partition the vertices")


class Factor:
    """Sparse LU used as a Cholesky: symmetric ordering, no pivoting, positive pivots."""

    def __init__(self, A: sp.spmatrix) -> None:
        A = sp.csc_matrix(A, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise InvalidArgument("matrix must be square")
        self.A = A
        self.n = A.shape[0]
        if self.n == 0:
            self._lu = None
            return
        if abs(A - A.T).max() > 1e-12 * max(abs(A).max(), 1e-300):
            raise NotSPD("matrix is not symmetric")
        try:
            lu = splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as exc:
            raise NotSPD(f"factorization failed: {exc}") from exc
        if np.any(lu.perm_r != lu.perm_c):
            raise NotSPD("pivoting left the diagonal; matrix is not positive definite")
        d = lu.U.diagonal()
        scale = max(np.abs(A.diagonal()).max(), 1e-300)
        if np.any(d <= 1e-14 * scale):
            raise NotSPD("non-positive pivot")
        self._lu = lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.n == 0:
            return rhs.copy()
        x = self._lu.solve(rhs)
        # one step of iterative refinement
        r = rhs - self.A @ x
        return x + self._lu.solve(r)


def factor_spd(A: sp.spmatrix) -> Factor:
    return Factor(A)


def solve(factor: Factor, rhs: np.ndarray) -> np.ndarray:
    return factor.solve(rhs)


def schur_complement(K: sp.spmatrix, p: DofPartition, factor: Factor | None = None) -> np.ndarray:
    """Dense S = K_FF - K_FE K_EE^{-1} K_EF, symmetrized."""
    K = sp.csr_matrix(K)
    p.check_covers(K.shape[0])
    KFF = K[p.F][:, p.F].toarray()
    if len(p.E) == 0:
        return 0.5 * (KFF + KFF.T)
    KEE = K[p.E][:, p.E]
    KEF = K[p.E][:, p.F]
    f = factor if factor is not None else factor_spd(KEE)
    X = f.solve(KEF.toarray())
    S = KFF - (KEF.T @ X)
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    multiplets: tuple[tuple[int, ...], ...]


def multiplets(values: np.ndarray, rtol: float = MULTIPLET_RTOL) -> tuple[tuple[int, ...], ...]:
    """Group indices of eigenvalues that agree within rtol*max(1,|sigma|)."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][-1]]) <= rtol * max(1.0, abs(v)):
            groups[-1].append(i)
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


def sym_generalized_eig(S: np.ndarray, B: np.ndarray, count: int | None = None) -> EigResult:
    """Lowest ``count`` eigenpairs of S y = sigma B y, B-orthonormal vectors.

    B is Cholesky-factored (B = L L^T) and the reduced standard problem
    L^{-1} S L^{-T} z = sigma z is solved densely.
    """
    S = np.asarray(S, dtype=float)
    B = np.asarray(B, dtype=float)
    n = S.shape[0]
    if S.shape != (n, n) or B.shape != (n, n):
        raise InvalidArgument("S and B must be square of the same order")
    k = n if count is None else int(count)
    if not 1 <= k <= n:
        raise InvalidArgument(f"count {k} outside 1..{n}")
    S = 0.5 * (S + S.T)
    B = 0.5 * (B + B.T)
    try:
        L = la.cholesky(B, lower=True)
    except la.LinAlgError as exc:
        raise NotSPD("boundary mass is not positive definite on the spectral set") from exc
    if np.any(np.diag(L) <= 1e-14 * np.sqrt(max(np.abs(np.diag(B)).max(), 1e-300))):
        raise NotSPD("boundary mass is numerically singular")
    A = la.solve_triangular(L, la.solve_triangular(L, S, lower=True).T, lower=True)
    A = 0.5 * (A + A.T)
    vals, Z = la.eigh(A, subset_by_index=(0, k - 1), driver="evr")
    Y = la.solve_triangular(L.T, Z, lower=False)
    R = S @ Y - (B @ Y) * vals
    res = np.linalg.norm(R, axis=0)
    return EigResult(vals, Y, res, multiplets(vals))
