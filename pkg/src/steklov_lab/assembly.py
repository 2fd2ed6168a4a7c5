"""Stiffness and boundary mass forms assembled from edge lengths."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument
from .mesh import Mesh, check_triangle_inequalities


def cotangent_weights(tl: np.ndarray) -> np.ndarray:
    """Half-cotangents of each corner, from (m, 3) opposite-edge lengths."""
    check_triangle_inequalities(tl)
    a2 = tl**2
    a, b, c = tl[:, 0], tl[:, 1], tl[:, 2]
    s = 0.5 * (a + b + c)
    area = np.sqrt(np.maximum(s * (s - a) * (s - b) * (s - c), 0.0))
    # cot of the angle at corner k: (sum of adjacent squares - opposite square) / (4A)
    tot = a2.sum(axis=1, keepdims=True)
    cot = (tot - 2 * a2) / (4 * area[:, None])
    return 0.5 * cot


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """P1 Dirichlet-energy matrix; intrinsic, so invariant under scaling."""
    t = mesh.triangles
    w = cotangent_weights(mesh.triangle_lengths())
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for k in range(3):
        i = t[:, (k + 1) % 3]
        j = t[:, (k + 2) % 3]
        wk = w[:, k]
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-wk, -wk, wk, wk]
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    K.sum_duplicates()
    K.sort_indices()
    return K


def vertex_weight(mesh: Mesh, w) -> np.ndarray:
    """Per-vertex boundary weight e^omega as a dense array (1 where unset)."""
    out = np.ones(mesh.n_vertices)
    if w is None:
        return out
    if np.isscalar(w):
        out[:] = float(w)
    elif isinstance(w, Mapping):
        for v, val in w.items():
            out[int(v)] = float(val)
    else:
        arr = np.asarray(w, dtype=float)
        if arr.shape != (mesh.n_vertices,):
            raise InvalidArgument("weight array must have one entry per vertex")
        out = arr.copy()
    bv = mesh.boundary_vertices()
    if np.any(out[bv] <= 0) or not np.all(np.isfinite(out[bv])):
        raise InvalidArgument("conformal weight must be positive on the boundary")
    return out


def _labeled_edges(mesh: Mesh, labels: Iterable[str] | None) -> tuple[np.ndarray, np.ndarray]:
    known = mesh.labels
    wanted = known if labels is None else set(labels)
    unknown = wanted - known
    if unknown:
        raise InvalidArgument(f"unknown boundary label(s): {sorted(unknown)}")
    e = [(u, v) for u, v, lab in mesh.boundary_edges() if lab in wanted]
    if not e:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0)
    e = np.array(e, dtype=np.int64)
    return e, mesh.lengths[mesh.edge_index(e[:, 0], e[:, 1])]


def assemble_boundary_mass(
    mesh: Mesh, labels: Iterable[str] | None = None, w=None, lumped: bool = False
) -> sp.csr_matrix:
    """Weighted P1 boundary mass on the edges carrying ``labels`` (all if None).

    Each edge contributes (len/6)[[2,1],[1,2]] times the mean of e^omega at
    its ends; ``lumped`` moves the row sums onto the diagonal.
    """
    e, lens = _labeled_edges(mesh, labels)
    wv = vertex_weight(mesh, w)
    n = mesh.n_vertices
    if len(e) == 0:
        return sp.csr_matrix((n, n))
    f = lens * 0.5 * (wv[e[:, 0]] + wv[e[:, 1]]) / 6.0
    i, j = e[:, 0], e[:, 1]
    if lumped:
        rows = np.concatenate([i, j])
        vals = np.concatenate([3 * f, 3 * f])
        B = sp.coo_matrix((vals, (rows, rows)), shape=(n, n))
    else:
        rows = np.concatenate([i, j, i, j])
        cols = np.concatenate([i, j, j, i])
        vals = np.concatenate([2 * f, 2 * f, f, f])
        B = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    B = B.tocsr()
    B.sum_duplicates()
    B.sort_indices()
    return B


def boundary_length(mesh: Mesh, labels: Iterable[str] | None = None, w=None) -> float:
    """Trapezoidal e^omega-weighted length of the labeled boundary."""
    e, lens = _labeled_edges(mesh, labels)
    if len(e) == 0:
        return 0.0
    wv = vertex_weight(mesh, w)
    return float(np.sum(lens * 0.5 * (wv[e[:, 0]] + wv[e[:, 1]])))


def dump_matrix(A: sp.spmatrix) -> str:
    """Sorted ``row col value`` lines for the upper triangle."""
    C = sp.triu(sp.csr_matrix(A)).tocoo()
    order = np.lexsort((C.col, C.row))
    return "".join(f"{C.row[k]} {C.col[k]} {float(C.data[k])!r}\n" for k in order)


def load_matrix(text: str, n: int | None = None) -> sp.csr_matrix:
    """Inverse of :func:`dump_matrix` (symmetric fill)."""
    rows, cols, vals = [], [], []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        r, c, v = ln.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(v))
    rows_a, cols_a, vals_a = np.array(rows, dtype=int), np.array(cols, dtype=int), np.array(vals)
    if n is None:
        n = int(max(rows_a.max(initial=-1), cols_a.max(initial=-1)) + 1)
    off = rows_a != cols_a
    A = sp.coo_matrix(
        (
            np.concatenate([vals_a, vals_a[off]]),
            (np.concatenate([rows_a, cols_a[off]]), np.concatenate([cols_a, rows_a[off]])),
        ),
        shape=(n, n),
    )
    return A.tocsr()
