"""Intrinsic triangle meshes with labeled boundary chains.

Geometry lives in per-edge lengths. Planar coordinates are optional and
only kept while they agree with the stored lengths; glued surfaces have
no global embedding and carry none.
"""

from __future__ import annotations

import hashlib
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import triangle as tr

from .errors import GlueMismatch, InvalidArgument, InvalidMesh

COORD_RTOL = 1e-12
GLUE_RTOL = 1e-9


@dataclass(frozen=True)
class BoundaryChain:
    """Cyclic list of boundary vertices; ``labels[i]`` tags edge i -> i+1."""

    vertices: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.labels):
            raise InvalidMesh("chain needs one label per edge")
        if len(self.vertices) < 2:
            raise InvalidMesh("chain has fewer than two vertices")

    def edges(self) -> list[tuple[int, int]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def __len__(self) -> int:
        return len(self.vertices)


def _edge_keys(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    return lo * n + hi


class Mesh:
    """Triangulated surface with boundary.

    ``regions`` maps a name to triangle indices, ``vertex_sets`` maps a
    name to an ordered vertex id array (used for the glued rectangle and
    its seam).
    """

    def __init__(
        self,
        n_vertices: int,
        triangles: np.ndarray,
        edge_lengths: Mapping[tuple[int, int], float] | tuple[np.ndarray, np.ndarray],
        chains: Sequence[BoundaryChain],
        coords: np.ndarray | None = None,
        regions: Mapping[str, np.ndarray] | None = None,
        vertex_sets: Mapping[str, np.ndarray] | None = None,
        check: bool = True,
    ) -> None:
        self.n_vertices = int(n_vertices)
        tris = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        if isinstance(edge_lengths, tuple):
            edges, lengths = edge_lengths
            edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
            lengths = np.asarray(lengths, dtype=float)
        else:
            items = list(edge_lengths.items())
            edges = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, 2)
            lengths = np.array([v for _, v in items], dtype=float)
        edges = np.sort(edges, axis=1)
        keys = _edge_keys(edges[:, 0], edges[:, 1], self.n_vertices)
        order = np.argsort(keys, kind="stable")
        self._keys = keys[order]
        self.edges = edges[order]
        self.lengths = lengths[order]
        self.triangles = tris
        self.chains = tuple(chains)
        self.coords = None if coords is None else np.asarray(coords, dtype=float).copy()
        self.regions = {k: np.asarray(v, dtype=np.int64) for k, v in (regions or {}).items()}
        self.vertex_sets = {
            k: np.asarray(v, dtype=np.int64) for k, v in (vertex_sets or {}).items()
        }
        for arr in (self.triangles, self.edges, self.lengths, self._keys):
            arr.setflags(write=False)
        if self.coords is not None:
            self.coords.setflags(write=False)
        if check:
            self.check()

    # -- lookups -----------------------------------------------------------

    def edge_index(self, a, b) -> np.ndarray:
        a = np.asarray(a)
        b = np.asarray(b)
        keys = _edge_keys(a, b, self.n_vertices)
        idx = np.searchsorted(self._keys, keys)
        idx = np.clip(idx, 0, len(self._keys) - 1)
        if np.any(self._keys[idx] != keys):
            raise InvalidMesh("edge missing from edge-length table")
        return idx

    def length(self, a: int, b: int) -> float:
        return float(self.lengths[self.edge_index(a, b)])

    def triangle_lengths(self) -> np.ndarray:
        """(m, 3) array; column k is the length of the edge opposite corner k."""
        t = self.triangles
        out = np.empty(t.shape, dtype=float)
        out[:, 0] = self.lengths[self.edge_index(t[:, 1], t[:, 2])]
        out[:, 1] = self.lengths[self.edge_index(t[:, 2], t[:, 0])]
        out[:, 2] = self.lengths[self.edge_index(t[:, 0], t[:, 1])]
        return out

    @property
    def labels(self) -> set[str]:
        return {lab for c in self.chains for lab in c.labels}

    def boundary_vertices(self) -> np.ndarray:
        return np.unique(np.concatenate([np.asarray(c.vertices) for c in self.chains]))

    def boundary_edges(self) -> list[tuple[int, int, str]]:
        """(u, v, label) for every boundary edge, chain order."""
        return [(u, v, lab) for c in self.chains for (u, v), lab in zip(c.edges(), c.labels)]

    def chain_positions(self, i: int) -> np.ndarray:
        """Arclength position of each vertex of chain ``i`` (first vertex at 0)."""
        c = self.chains[i]
        e = c.edges()
        lens = self.lengths[self.edge_index([u for u, _ in e], [v for _, v in e])]
        return np.concatenate([[0.0], np.cumsum(lens)[:-1]])

    def chain_length(self, i: int) -> float:
        c = self.chains[i]
        e = c.edges()
        return float(self.lengths[self.edge_index([u for u, _ in e], [v for _, v in e])].sum())

    def chain_edge_lengths(self, i: int) -> np.ndarray:
        e = self.chains[i].edges()
        return self.lengths[self.edge_index([u for u, _ in e], [v for _, v in e])]

    def boundary_length(self, labels: Iterable[str] | None = None) -> float:
        wanted = None if labels is None else set(labels)
        total = 0.0
        for u, v, lab in self.boundary_edges():
            if wanted is None or lab in wanted:
                total += self.length(u, v)
        return total

    @property
    def euler_characteristic(self) -> int:
        used = np.unique(self.triangles)
        return int(len(used) - len(self.edges) + len(self.triangles))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.triangles).tobytes())
        h.update(np.ascontiguousarray(self.edges).tobytes())
        h.update(np.ascontiguousarray(self.lengths).tobytes())
        for c in self.chains:
            h.update(repr((c.vertices, c.labels)).encode())
        return h.hexdigest()[:16]

    def replace(self, **kw) -> "Mesh":
        args = dict(
            n_vertices=self.n_vertices,
            triangles=self.triangles,
            edge_lengths=(self.edges, self.lengths),
            chains=self.chains,
            coords=self.coords,
            regions=self.regions,
            vertex_sets=self.vertex_sets,
        )
        args.update(kw)
        return Mesh(**args)

    # -- invariants --------------------------------------------------------

    def check(self) -> None:
        n = self.n_vertices
        t = self.triangles
        if t.size and (t.min() < 0 or t.max() >= n):
            raise InvalidMesh("triangle refers to unknown vertex")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise InvalidMesh("degenerate triangle")
        if np.any(self.lengths <= 0) or not np.all(np.isfinite(self.lengths)):
            raise InvalidMesh("edge lengths must be positive and finite")
        if len(np.unique(self._keys)) != len(self._keys):
            raise InvalidMesh("duplicate edge in length table")
        tk = np.concatenate(
            [_edge_keys(t[:, i], t[:, (i + 1) % 3], n) for i in range(3)]
        )
        uk, counts = np.unique(tk, return_counts=True)
        if len(uk) != len(self._keys) or np.any(uk != self._keys):
            raise InvalidMesh("edge table does not match triangle edges")
        if np.any(counts > 2):
            raise InvalidMesh("edge shared by more than two triangles")
        check_triangle_inequalities(self.triangle_lengths())

        bkeys = np.sort(uk[counts == 1])
        seen: set[int] = set()
        ckeys = []
        for c in self.chains:
            for v in c.vertices:
                if v in seen:
                    raise InvalidMesh("boundary chains are not disjoint simple cycles")
                seen.add(v)
            e = c.edges()
            ckeys.extend(_edge_keys(np.array([a for a, _ in e]), np.array([b for _, b in e]), n))
        if len(ckeys) != len(bkeys) or np.any(np.sort(np.array(ckeys, dtype=np.int64)) != bkeys):
            raise InvalidMesh("boundary chains do not match the boundary edges")

        if self.coords is not None:
            if self.coords.shape != (n, 2):
                raise InvalidMesh("coords must be (n_vertices, 2)")
            d = np.linalg.norm(self.coords[self.edges[:, 0]] - self.coords[self.edges[:, 1]], axis=1)
            if np.any(np.abs(d - self.lengths) > COORD_RTOL * self.lengths):
                raise InvalidMesh("coordinates disagree with stored edge lengths")

    def coords_consistent(self, coords: np.ndarray) -> bool:
        d = np.linalg.norm(coords[self.edges[:, 0]] - coords[self.edges[:, 1]], axis=1)
        return bool(np.all(np.abs(d - self.lengths) <= COORD_RTOL * self.lengths))

    def __repr__(self) -> str:
        return (
            f"Mesh(V={self.n_vertices}, T={len(self.triangles)}, chains={len(self.chains)}, "
            f"labels={sorted(self.labels)})"
        )


def check_triangle_inequalities(tl: np.ndarray) -> None:
    a, b, c = tl[:, 0], tl[:, 1], tl[:, 2]
    slack = np.minimum.reduce([b + c - a, a + c - b, a + b - c])
    if np.any(slack <= 1e-14 * (a + b + c)):
        raise InvalidMesh("triangle inequality violated")


# -- arcs and glue specs ------------------------------------------------------


@dataclass(frozen=True)
class BoundaryArc:
    """Piece of a boundary chain between arclength positions s0 < s1.

    Positions are measured from the chain's first vertex. ``s1`` may run
    past the chain length, in which case the arc wraps through the first
    vertex.
    """

    chain: int
    s0: float
    s1: float
    reverse: bool = False

    def __post_init__(self) -> None:
        if not (self.s0 >= 0 and self.s1 > self.s0):
            raise InvalidArgument(f"bad arc positions s0={self.s0}, s1={self.s1}")

    @property
    def length(self) -> float:
        return self.s1 - self.s0

    @classmethod
    def centered(cls, mesh: Mesh, chain: int, center: float, length: float) -> "BoundaryArc":
        total = mesh.chain_length(chain)
        if not 0 < length < total:
            raise InvalidArgument("arc length must be positive and shorter than the chain")
        s0 = (center - 0.5 * length) % total
        return cls(chain, s0, s0 + length)


@dataclass(frozen=True)
class GlueSpec:
    """Attachment data for the thin rectangle of size eps^2 x eps*h."""

    epsilon: float
    h: float
    arc1: BoundaryArc
    arc2: BoundaryArc
    reverse_orientation: bool = False
    resolution: tuple[int, int] = (8, 64)

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and self.h > 0):
            raise InvalidArgument("epsilon and h must be positive")
        nx, ny = self.resolution
        if nx < 2 or ny < 2:
            raise InvalidArgument("rectangle resolution needs nx >= 2 and ny >= 2")
        w = self.epsilon**2
        for arc in (self.arc1, self.arc2):
            if abs(arc.length - w) > GLUE_RTOL * w:
                raise InvalidArgument(f"arc length {arc.length} differs from epsilon^2 = {w}")

    @property
    def reversed(self) -> bool:
        return self.reverse_orientation ^ self.arc1.reverse ^ self.arc2.reverse


def _arcs_overlap(a: BoundaryArc, b: BoundaryArc, total: float) -> bool:
    if a.chain != b.chain:
        return False
    # shift so a starts at 0
    start = (b.s0 - a.s0) % total
    end = start + b.length
    return start < a.length or end > total


# -- generators ---------------------------------------------------------------


def _graded_angles(
    n_angular: int, cluster_points: Sequence[float], cluster_factor: float, growth: float = 0.2
) -> np.ndarray:
    if not cluster_points or cluster_factor == 1:
        return 2 * math.pi * np.arange(n_angular) / n_angular
    s_far = 2 * math.pi / n_angular
    s_near = s_far / cluster_factor
    cps = np.unique(np.mod(np.asarray(cluster_points, dtype=float), 2 * math.pi))

    def spacing(theta: np.ndarray) -> np.ndarray:
        d = np.abs(theta[:, None] - cps[None, :]) % (2 * math.pi)
        d = np.minimum(d, 2 * math.pi - d).min(axis=1)
        return np.minimum(s_far, s_near + growth * d)

    out = []
    for i, a in enumerate(cps):
        b = cps[i + 1] if i + 1 < len(cps) else cps[0] + 2 * math.pi
        m = max(4000, int(40 * (b - a) / s_near))
        th = np.linspace(a, b, m)
        f = 1.0 / spacing(th)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(th))])
        n_seg = max(1, int(round(cum[-1])))
        targets = cum[-1] * np.arange(n_seg) / n_seg
        out.append(np.interp(targets, cum, th))
    ang = np.mod(np.concatenate(out), 2 * math.pi)
    return np.sort(ang)


def _refine_to_size(pslg: dict, size, min_angle: float = 30.0, max_rounds: int = 40) -> dict:
    flags = f"pq{min_angle:g}YQ"
    t = tr.triangulate(pslg, flags)
    for _ in range(max_rounds):
        v, tri = t["vertices"], t["triangles"]
        p = v[tri]
        area = 0.5 * np.abs(
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
        )
        target = (math.sqrt(3) / 4) * size(p.mean(axis=1)) ** 2
        if np.all(area <= 1.25 * target):
            break
        data = dict(vertices=v, triangles=tri, segments=t["segments"], triangle_max_area=target)
        if "holes" in pslg:
            data["holes"] = pslg["holes"]
        t = tr.triangulate(data, f"rpq{min_angle:g}aYQ")
    return t


def _planar_mesh(
    vertices: np.ndarray,
    triangles: np.ndarray,
    loops: Sequence[tuple[Sequence[int], str]],
) -> Mesh:
    """Mesh from planar data; loops are (boundary vertex ids, label)."""
    tris = np.asarray(triangles, dtype=np.int64)
    p = vertices[tris]
    signed = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (
        p[:, 2, 0] - p[:, 0, 0]
    )
    flip = signed < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e = np.unique(np.sort(e, axis=1), axis=0)
    lengths = np.linalg.norm(vertices[e[:, 0]] - vertices[e[:, 1]], axis=1)
    directed = {(int(a), int(b)) for a, b in np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])}
    chains = []
    for ids, label in loops:
        ids = [int(i) for i in ids]
        if (ids[0], ids[1]) not in directed:
            ids = [ids[0]] + ids[1:][::-1]
        chains.append(BoundaryChain(tuple(ids), (label,) * len(ids)))
    return Mesh(len(vertices), tris, (e, lengths), chains, coords=vertices)


def make_disk_mesh(
    n_radial: int,
    n_angular: int,
    cluster_points: Sequence[float] = (),
    cluster_factor: float = 1.0,
    growth: float = 0.2,
) -> Mesh:
    """Unit disk, one boundary chain labeled ``"outer"``.

    ``n_angular`` sets the far-field boundary spacing 2*pi/n_angular and
    ``n_radial`` the interior element size 1/n_radial. Near each angle in
    ``cluster_points`` the spacing drops by ``cluster_factor`` and grows back
    linearly (rate ``growth``), both on the boundary and inside.
    """
    if n_radial < 2 or n_angular < 8:
        raise InvalidArgument("make_disk_mesh needs n_radial >= 2 and n_angular >= 8")
    if cluster_factor < 1:
        raise InvalidArgument("cluster_factor must be >= 1")
    ang = _graded_angles(n_angular, list(cluster_points), cluster_factor, growth)
    nb = len(ang)
    bpts = np.c_[np.cos(ang), np.sin(ang)]
    # exact values on the axes keep mirror-symmetric inputs symmetric
    bpts[np.abs(bpts) < 1e-15] = 0.0
    s_far = 2 * math.pi / n_angular
    s_int = 1.0 / n_radial
    cps = np.asarray(list(cluster_points), dtype=float)
    cpts = np.c_[np.cos(cps), np.sin(cps)] if len(cps) and cluster_factor > 1 else np.zeros((0, 2))
    s_near = s_far / cluster_factor

    def size(x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(x, axis=1)
        s = s_int + (s_far - s_int) * np.clip(r, 0, 1)
        for c in cpts:
            s = np.minimum(s, s_near + growth * np.linalg.norm(x - c, axis=1))
        return s

    segs = np.c_[np.arange(nb), (np.arange(nb) + 1) % nb]
    t = _refine_to_size(dict(vertices=bpts, segments=segs), size)
    v = t["vertices"]
    return _planar_mesh(v, t["triangles"], [(range(nb), "outer")])


def make_annulus_mesh(
    n_radial: int,
    n_angular: int,
    inner_radius: float = 0.5,
    cluster_points: Sequence[float] = (),
    cluster_factor: float = 1.0,
) -> Mesh:
    """Annulus inner_radius < r < 1 with chains ``"outer"`` and ``"inner"``."""
    if n_radial < 2 or n_angular < 8 or not 0 < inner_radius < 1:
        raise InvalidArgument("bad annulus parameters")
    ang = _graded_angles(n_angular, list(cluster_points), cluster_factor)
    n_in = max(8, int(round(n_angular * inner_radius)))
    ang_in = 2 * math.pi * np.arange(n_in) / n_in
    outer = np.c_[np.cos(ang), np.sin(ang)]
    inner = inner_radius * np.c_[np.cos(ang_in), np.sin(ang_in)]
    no = len(outer)
    pts = np.vstack([outer, inner])
    segs = np.vstack(
        [
            np.c_[np.arange(no), (np.arange(no) + 1) % no],
            no + np.c_[np.arange(n_in), (np.arange(n_in) + 1) % n_in],
        ]
    )
    s_far = 2 * math.pi / n_angular
    s_int = (1 - inner_radius) / n_radial

    def size(x: np.ndarray) -> np.ndarray:
        return np.full(len(x), min(s_far, max(s_int, s_far * inner_radius)))

    t = _refine_to_size(dict(vertices=pts, segments=segs, holes=[[0.0, 0.0]]), size)
    v = t["vertices"]
    return _planar_mesh(v, t["triangles"], [(range(no), "outer"), (range(no, no + n_in), "inner")])


def _graded_unit(ny: int, max_ratio: float = 1.2) -> np.ndarray:
    """Nodes on [0, 1] refined toward both ends; neighbouring cells differ by <= max_ratio."""
    s = np.arange(ny + 1) / ny
    a = 0.5
    while True:
        y = s - a * np.sin(2 * math.pi * s) / (2 * math.pi)
        d = np.diff(y)
        ratio = np.max(np.maximum(d[1:] / d[:-1], d[:-1] / d[1:])) if ny > 1 else 1.0
        if ratio <= max_ratio or a < 1e-6:
            break
        a *= 0.9
    y[0], y[-1] = 0.0, 1.0
    return y


def make_rectangle_mesh(epsilon: float, h: float, nx: int, ny: int) -> Mesh:
    """Flat rectangle [-eps^2/2, eps^2/2] x [-eps*h/2, eps*h/2].

    Short sides are ``I_bottom``/``I_top``, long sides ``free_left``/``free_right``.
    Vertex (i, j) has id ``j*(nx+1) + i``. Rows are graded toward the short sides.
    """
    if not (epsilon > 0 and h > 0):
        raise InvalidArgument("epsilon and h must be positive")
    if nx < 1 or ny < 1:
        raise InvalidArgument("nx, ny must be >= 1")
    w = epsilon**2
    H = epsilon * h
    xs = w * (np.arange(nx + 1) / nx - 0.5)
    ys = H * (_graded_unit(ny) - 0.5)
    X, Y = np.meshgrid(xs, ys)
    coords = np.c_[X.ravel(), Y.ravel()]
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    tris = np.vstack([np.c_[a, b, c], np.c_[a, c, d]])

    # exact lengths: grid spacings instead of coordinate differences
    dx = np.diff(xs)
    dy = np.diff(ys)
    edges, lengths = [], []
    for j in range(ny + 1):
        for i in range(nx):
            edges.append((idx[j, i], idx[j, i + 1]))
            lengths.append(dx[i])
    for j in range(ny):
        for i in range(nx + 1):
            edges.append((idx[j, i], idx[j + 1, i]))
            lengths.append(dy[j])
        for i in range(nx):
            edges.append((idx[j, i], idx[j + 1, i + 1]))
            lengths.append(math.hypot(dx[i], dy[j]))

    bottom = list(idx[0, :])
    right = list(idx[:, nx])
    top = list(idx[ny, ::-1])
    left = list(idx[::-1, 0])
    verts = bottom[:-1] + right[:-1] + top[:-1] + left[:-1]
    labels = (
        ["I_bottom"] * nx + ["free_right"] * ny + ["I_top"] * nx + ["free_left"] * ny
    )
    chain = BoundaryChain(tuple(int(v) for v in verts), tuple(labels))
    mesh = Mesh(
        len(coords),
        tris,
        (np.array(edges), np.array(lengths)),
        [chain],
        coords=None,
        regions={"rect": np.arange(len(tris))},
        vertex_sets={"I_bottom": idx[0, :], "I_top": idx[ny, :]},
    )
    return mesh.replace(coords=coords) if mesh.coords_consistent(coords) else mesh


def scale(mesh: Mesh, t: float) -> Mesh:
    """Multiply every length (and coordinate) by ``t``."""
    if not t > 0:
        raise InvalidArgument("scale factor must be positive")
    if t == 1:
        return mesh
    coords = None if mesh.coords is None else mesh.coords * t
    m = mesh.replace(edge_lengths=(mesh.edges, mesh.lengths * t), coords=None)
    if coords is not None and m.coords_consistent(coords):
        m = m.replace(coords=coords)
    return m


# -- orientation and topology -------------------------------------------------


def orient_triangles(triangles: np.ndarray) -> np.ndarray | None:
    """Consistently oriented copy of ``triangles``, or None if non-orientable."""
    tris = np.array(triangles, dtype=np.int64)
    by_edge: dict[tuple[int, int], list[int]] = defaultdict(list)
    for ti, t in enumerate(tris):
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            by_edge[(min(a, b), max(a, b))].append(ti)
    state = np.zeros(len(tris), dtype=np.int8)  # 0 unvisited, 1 fixed

    def directed(ti: int, a: int, b: int) -> bool:
        t = tris[ti]
        for k in range(3):
            if t[k] == a and t[(k + 1) % 3] == b:
                return True
        return False

    for root in range(len(tris)):
        if state[root]:
            continue
        state[root] = 1
        queue = deque([root])
        while queue:
            ti = queue.popleft()
            t = tris[ti]
            for k in range(3):
                a, b = int(t[k]), int(t[(k + 1) % 3])
                for tj in by_edge[(min(a, b), max(a, b))]:
                    if tj == ti:
                        continue
                    # neighbour must traverse (a, b) as (b, a)
                    ok = directed(tj, b, a)
                    if state[tj]:
                        if not ok:
                            return None
                        continue
                    if not ok:
                        tris[tj] = tris[tj][[0, 2, 1]]
                    state[tj] = 1
                    queue.append(tj)
    return tris


@dataclass(frozen=True)
class SurfaceTopology:
    orientable: bool
    genus: int
    boundary_components: int
    euler_characteristic: int


def surface_topology(mesh: Mesh) -> SurfaceTopology:
    chi = mesh.euler_characteristic
    k = len(mesh.chains)
    orientable = orient_triangles(mesh.triangles) is not None
    genus = (2 - chi - k) // 2 if orientable else 2 - chi - k
    return SurfaceTopology(orientable, int(genus), k, chi)


def _chains_from_triangles(
    triangles: np.ndarray, edge_labels: Mapping[tuple[int, int], str]
) -> list[BoundaryChain]:
    """Walk boundary cycles; direction follows triangle orientation when it exists."""
    oriented = orient_triangles(triangles)
    tris = oriented if oriented is not None else np.asarray(triangles)
    count: dict[tuple[int, int], int] = defaultdict(int)
    succ_dir: dict[int, int] = {}
    for t in tris:
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            count[(min(a, b), max(a, b))] += 1
    bnd = [e for e, c in count.items() if c == 1]
    if oriented is not None:
        bset = set(bnd)
        for t in tris:
            for k in range(3):
                a, b = int(t[k]), int(t[(k + 1) % 3])
                if (min(a, b), max(a, b)) in bset:
                    succ_dir[a] = b
    nbrs: dict[int, list[int]] = defaultdict(list)
    for a, b in bnd:
        nbrs[a].append(b)
        nbrs[b].append(a)
    if any(len(v) != 2 for v in nbrs.values()):
        raise InvalidMesh("boundary is not a union of simple cycles")
    chains = []
    visited: set[int] = set()
    for start in sorted(nbrs):
        if start in visited:
            continue
        cyc = [start]
        visited.add(start)
        prev, cur = start, succ_dir.get(start, min(nbrs[start]))
        while cur != start:
            cyc.append(cur)
            visited.add(cur)
            a, b = nbrs[cur]
            nxt = succ_dir.get(cur, a if b == prev else b)
            prev, cur = cur, nxt
        labels = []
        for i in range(len(cyc)):
            u, v = cyc[i], cyc[(i + 1) % len(cyc)]
            labels.append(edge_labels[(min(u, v), max(u, v))])
        chains.append(BoundaryChain(tuple(cyc), tuple(labels)))
    return chains


# -- local layout -------------------------------------------------------------


def _unfold(mesh: Mesh, tri_ids: Sequence[int]) -> dict[int, np.ndarray]:
    """Flat layout of a patch of triangles from edge lengths alone."""
    tris = mesh.triangles
    tri_ids = list(tri_ids)
    by_edge: dict[tuple[int, int], list[int]] = defaultdict(list)
    for ti in tri_ids:
        t = tris[ti]
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            by_edge[(min(a, b), max(a, b))].append(ti)
    pos: dict[int, np.ndarray] = {}
    t0 = tris[tri_ids[0]]
    a, b, c = (int(x) for x in t0)
    lab = mesh.length(a, b)
    pos[a] = np.zeros(2)
    pos[b] = np.array([lab, 0.0])
    pos[c] = _third_point(pos[a], pos[b], mesh.length(a, c), mesh.length(b, c), side=1.0)
    done = {tri_ids[0]}
    queue = deque([tri_ids[0]])
    while queue:
        ti = queue.popleft()
        t = [int(x) for x in tris[ti]]
        for k in range(3):
            u, v = t[k], t[(k + 1) % 3]
            w = t[(k + 2) % 3]
            for tj in by_edge[(min(u, v), max(u, v))]:
                if tj in done:
                    continue
                x = [int(q) for q in tris[tj] if q != u and q != v][0]
                if x not in pos:
                    # opposite side of (u, v) from w
                    d = pos[v] - pos[u]
                    cross_w = d[0] * (pos[w] - pos[u])[1] - d[1] * (pos[w] - pos[u])[0]
                    pos[x] = _third_point(
                        pos[u], pos[v], mesh.length(u, x), mesh.length(v, x), side=-np.sign(cross_w)
                    )
                done.add(tj)
                queue.append(tj)
    return pos


def _third_point(p: np.ndarray, q: np.ndarray, dp: float, dq: float, side: float) -> np.ndarray:
    base = np.linalg.norm(q - p)
    e = (q - p) / base
    n = np.array([-e[1], e[0]])
    x = (dp * dp - dq * dq + base * base) / (2 * base)
    y = math.sqrt(max(dp * dp - x * x, 0.0))
    return p + x * e + side * y * n


# -- arc alignment ------------------------------------------------------------


def align_arc(
    mesh: Mesh, arc: BoundaryArc, n: int, label: str
) -> tuple[Mesh, BoundaryArc, float]:
    """Remesh the boundary near ``arc`` so it is exactly ``n`` equal edges.

    Boundary vertices inside the arc (and within half an arc edge of its
    ends) are removed, the arc points are inserted along the old boundary
    polyline, and the cavity formed by the affected triangles is
    re-triangulated. Boundary edge lengths are arclength differences, so
    the chain length is preserved.

    Returns the new mesh, the arc in the new chain's coordinates and the
    shift subtracted from every position on that chain.
    """
    if n < 1:
        raise InvalidArgument("need at least one arc edge")
    ci = arc.chain
    if not 0 <= ci < len(mesh.chains):
        raise InvalidArgument(f"no chain {ci}")
    chain = mesh.chains[ci]
    total = mesh.chain_length(ci)
    span = arc.length
    delta = span / n
    pad = 0.5 * delta
    if span + 2 * pad >= 0.8 * total:
        raise InvalidArgument("arc too long for its chain")
    verts = list(chain.vertices)
    m = len(verts)
    pos = mesh.chain_positions(ci)
    # positions relative to arc start, in [-(total - span)/2, (total + span)/2)
    rel = np.mod(pos - arc.s0 + 0.5 * (total - span), total) - 0.5 * (total - span)
    tol = 1e-12 * total
    in_region = (rel > -pad) & (rel < span + pad)
    if np.all(in_region):
        raise InvalidArgument("arc region covers the whole chain")
    targets = delta * np.arange(n + 1)
    # every old vertex in the region goes; keeping coincident ones would let
    # the cavity boundary touch the new arc
    matched: dict[int, int] = {}
    removed = [verts[i] for i in np.flatnonzero(in_region)]

    # Lv: last chain vertex before the region, Rv: first after
    first = int(np.flatnonzero(in_region & (rel == rel[in_region].min()))[0]) if in_region.any() else None
    if first is None:
        # arc strictly inside one edge: find the edge containing position 0
        first = int(np.flatnonzero((rel <= 0))[np.argmax(rel[rel <= 0])])
        li = first
        ri = (li + 1) % m
    else:
        li = (first - 1) % m
        ri = first
        while in_region[ri]:
            ri = (ri + 1) % m
    Lv, Rv = verts[li], verts[ri]
    r_L = rel[li]
    r_R = rel[ri] if rel[ri] > r_L else rel[ri] + total
    seg_idx = []
    i = li
    while True:
        seg_idx.append(i)
        if i == ri:
            break
        i = (i + 1) % m
    seg_verts = [verts[i] for i in seg_idx]
    seg_rel = np.array([rel[i] for i in seg_idx])
    seg_rel = np.where(seg_rel < r_L, seg_rel + total, seg_rel)
    seg_rel[-1] = r_R

    # cavity
    tris = mesh.triangles
    vert_tris: dict[int, list[int]] = defaultdict(list)
    for ti, t in enumerate(tris):
        for x in t:
            vert_tris[int(x)].append(ti)
    cav: set[int] = set()
    for v in removed:
        cav.update(vert_tris[v])
    for u, v in zip(seg_verts[:-1], seg_verts[1:]):
        cav.update(set(vert_tris[u]) & set(vert_tris[v]))
    cav_list = sorted(cav)

    ecount: dict[tuple[int, int], int] = defaultdict(int)
    for ti in cav_list:
        t = tris[ti]
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            ecount[(min(a, b), max(a, b))] += 1
    chain_edges = {(min(u, v), max(u, v)) for u, v in zip(seg_verts[:-1], seg_verts[1:])}
    inner_adj: dict[int, list[int]] = defaultdict(list)
    for (a, b), c in ecount.items():
        if c == 1 and (a, b) not in chain_edges:
            inner_adj[a].append(b)
            inner_adj[b].append(a)
    if any(len(v) != 2 for k, v in inner_adj.items() if k not in (Lv, Rv)) or len(inner_adj[Rv]) != 1:
        raise InvalidMesh("cavity around the arc is not a topological disk")
    inner = [Rv]
    prev, cur = None, Rv
    while cur != Lv:
        nxt = [x for x in inner_adj[cur] if x != prev]
        if not nxt:
            raise InvalidMesh("cavity boundary is not closed")
        prev, cur = cur, nxt[0]
        inner.append(cur)
        if len(inner) > len(ecount) + 2:
            raise InvalidMesh("cavity boundary walk failed")
    if set(inner[1:-1]) & set(removed):
        raise InvalidMesh("cavity boundary passes through removed vertices")

    # local layout
    if mesh.coords is not None:
        local = {int(v): mesh.coords[v] for ti in cav_list for v in tris[ti]}
    else:
        local = _unfold(mesh, cav_list)

    def point_at(r: float) -> np.ndarray:
        j = int(np.searchsorted(seg_rel, r, side="right") - 1)
        j = min(max(j, 0), len(seg_rel) - 2)
        u, v = seg_verts[j], seg_verts[j + 1]
        f = (r - seg_rel[j]) / (seg_rel[j + 1] - seg_rel[j])
        return local[u] + f * (local[v] - local[u])

    def label_at(r: float) -> str:
        j = int(np.searchsorted(seg_rel, r, side="right") - 1)
        j = min(max(j, 0), len(seg_rel) - 2)
        return chain.labels[seg_idx[j]]

    next_id = mesh.n_vertices
    arc_ids: list[int] = []
    new_pos: dict[int, np.ndarray] = {}
    for k in range(n + 1):
        if k in matched:
            arc_ids.append(matched[k])
        else:
            arc_ids.append(next_id)
            new_pos[next_id] = point_at(targets[k])
            next_id += 1
    local.update(new_pos)

    poly = [Lv] + arc_ids + inner[:-1]  # inner starts at Rv and ends at Lv
    poly_pts = np.array([local[v] for v in poly])
    segs = np.c_[np.arange(len(poly)), (np.arange(len(poly)) + 1) % len(poly)]
    # inner path runs Rv -> Lv, so the polygon is already a closed loop
    # quality refinement may add interior points, never boundary ones (Y)
    res = tr.triangulate(dict(vertices=poly_pts, segments=segs), "pq20YQ")
    out_v = res["vertices"]
    if not np.allclose(out_v[: len(poly)], poly_pts, rtol=0, atol=0):
        raise InvalidMesh("cavity triangulation moved polygon vertices")
    for p in out_v[len(poly):]:
        poly.append(next_id)
        new_pos[next_id] = np.array(p, dtype=float)
        local[next_id] = new_pos[next_id]
        next_id += 1
    new_tris = np.array([[poly[int(x)] for x in t] for t in res["triangles"]], dtype=np.int64)

    keep_tris = np.array([ti for ti in range(len(tris)) if ti not in cav], dtype=np.int64)
    all_tris = np.vstack([tris[keep_tris], new_tris])

    # edge lengths
    old = {(int(a), int(b)): float(l) for (a, b), l in zip(mesh.edges, mesh.lengths)}
    boundary_new: dict[tuple[int, int], float] = {}
    chain_seq = [Lv] + arc_ids + [Rv]
    chain_rel = [r_L] + list(targets) + [r_R]
    seq_pairs = list(zip(chain_seq[:-1], chain_seq[1:]))
    for j, (u, v) in enumerate(seq_pairs):
        if u == v:
            continue
        if 1 <= j <= n:
            length = delta
        else:
            length = chain_rel[j + 1] - chain_rel[j]
        boundary_new[(min(u, v), max(u, v))] = length
    lengths: dict[tuple[int, int], float] = {}
    for t in all_tris:
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            key = (min(a, b), max(a, b))
            if key in lengths:
                continue
            if key in boundary_new:
                lengths[key] = boundary_new[key]
            elif key in old and a not in new_pos and b not in new_pos:
                lengths[key] = old[key]
            else:
                lengths[key] = float(np.linalg.norm(local[a] - local[b]))

    # new chain
    new_chain_verts: list[int] = []
    new_labels: list[str] = []
    seq = [x for x in chain_seq]
    # dedupe equal consecutive ids (Lv == arc start cannot happen; guard anyway)
    compact = [seq[0]]
    compact_rel = [chain_rel[0]]
    for v, r in zip(seq[1:], chain_rel[1:]):
        if v != compact[-1]:
            compact.append(v)
            compact_rel.append(r)
    seq_labels = []
    for j in range(len(compact) - 1):
        mid = 0.5 * (compact_rel[j] + compact_rel[j + 1])
        inside = 0.0 <= compact_rel[j] - 0 + 1e-15 and compact_rel[j + 1] <= span + 1e-12 * total
        seq_labels.append(label if inside else label_at(mid))
    # walk original chain from Rv around to Lv, then splice
    j = ri
    while True:
        nxt = (j + 1) % m
        new_chain_verts.append(verts[j])
        new_labels.append(chain.labels[j])
        if verts[j] == Lv:
            new_labels.pop()
            break
        j = nxt
    new_chain_verts.pop()  # Lv re-added by the spliced sequence
    spliced_v = new_chain_verts + compact[:-1]
    spliced_l = new_labels + seq_labels
    # root the chain like the original when possible
    start = verts[0]
    if start in spliced_v:
        rot = spliced_v.index(start)
        shift = 0.0
    else:
        rot = spliced_v.index(Rv)
        shift = float(pos[ri])
    spliced_v = spliced_v[rot:] + spliced_v[:rot]
    spliced_l = spliced_l[rot:] + spliced_l[:rot]
    chains = list(mesh.chains)
    chains[ci] = BoundaryChain(tuple(spliced_v), tuple(spliced_l))

    # drop removed vertices
    n_new = next_id
    alive = np.ones(n_new, dtype=bool)
    alive[removed] = False
    remap = -np.ones(n_new, dtype=np.int64)
    remap[alive] = np.arange(int(alive.sum()))
    all_tris = remap[all_tris]
    e_keys = np.array(list(lengths.keys()), dtype=np.int64)
    e_vals = np.array(list(lengths.values()))
    e_keys = remap[e_keys]
    chains = [
        BoundaryChain(tuple(int(remap[v]) for v in c.vertices), c.labels) for c in chains
    ]
    coords = None
    if mesh.coords is not None:
        full = np.zeros((n_new, 2))
        full[: mesh.n_vertices] = mesh.coords
        for v, p in new_pos.items():
            full[v] = p
        coords = full[alive]
    regions = {}
    if mesh.regions:
        owner = {int(ti): name for name, ids in mesh.regions.items() for ti in ids}
        cav_region = owner.get(cav_list[0])
        new_idx = {int(old_i): j for j, old_i in enumerate(keep_tris)}
        for name, ids in mesh.regions.items():
            kept = [new_idx[int(t)] for t in ids if int(t) in new_idx]
            if name == cav_region:
                kept += list(range(len(keep_tris), len(all_tris)))
            regions[name] = np.array(sorted(kept), dtype=np.int64)
    vsets = {
        k: remap[v[alive[v]]] for k, v in mesh.vertex_sets.items() if len(v)
    }
    out = Mesh(int(alive.sum()), all_tris, (e_keys, e_vals), chains, regions=regions, vertex_sets=vsets)
    if coords is not None and out.coords_consistent(coords):
        out = out.replace(coords=coords)
    new_total = out.chain_length(ci)
    s0 = (arc.s0 - shift) % new_total
    return out, BoundaryArc(ci, s0, s0 + span, arc.reverse), shift


def shift_arc(arc: BoundaryArc, shift: float, total: float) -> BoundaryArc:
    s0 = (arc.s0 - shift) % total
    return BoundaryArc(arc.chain, s0, s0 + arc.length, arc.reverse)


def align_for_glue(base: Mesh, spec: GlueSpec, labels: tuple[str, str] = ("arc1", "arc2")) -> tuple[Mesh, GlueSpec]:
    """Align both arcs of ``spec`` on ``base``; returns the mesh and the respecified glue."""
    nx = spec.resolution[0]
    a1, a2 = spec.arc1, spec.arc2
    if a1.chain == a2.chain and _arcs_overlap(a1, a2, base.chain_length(a1.chain)):
        raise InvalidArgument("glue arcs overlap")
    m1, a1n, sh = align_arc(base, a1, nx, labels[0])
    if a2.chain == a1.chain:
        a2 = shift_arc(a2, sh, m1.chain_length(a2.chain))
    m2, a2n, sh2 = align_arc(m1, a2, nx, labels[1])
    if a1n.chain == a2n.chain:
        a1n = shift_arc(a1n, sh2, m2.chain_length(a1n.chain))
    new_spec = GlueSpec(spec.epsilon, spec.h, a1n, a2n, spec.reverse_orientation, spec.resolution)
    return m2, new_spec


# -- glueing ------------------------------------------------------------------


def _arc_vertices(mesh: Mesh, arc: BoundaryArc, nx: int, piece: float) -> list[int]:
    ci = arc.chain
    if not 0 <= ci < len(mesh.chains):
        raise InvalidArgument(f"no chain {ci}")
    total = mesh.chain_length(ci)
    pos = mesh.chain_positions(ci)
    verts = mesh.chains[ci].vertices
    d = np.abs(np.mod(pos - arc.s0 + 0.5 * total, total) - 0.5 * total)
    i0 = int(np.argmin(d))
    if d[i0] > GLUE_RTOL * max(total, 1.0):
        raise GlueMismatch(f"no boundary vertex at arc start s0={arc.s0}")
    lens = mesh.chain_edge_lengths(ci)
    m = len(verts)
    out = [verts[i0]]
    for k in range(nx):
        j = (i0 + k) % m
        if abs(lens[j] - piece) > GLUE_RTOL * piece:
            raise GlueMismatch(
                f"arc edge {k} has length {lens[j]:.6g}, rectangle side needs {piece:.6g}"
            )
        out.append(verts[(j + 1) % m])
    return out


def glue(base: Mesh, spec: GlueSpec) -> Mesh:
    """Attach the rectangle along ``spec``'s arcs.

    The arcs must already be vertex-aligned (see :func:`align_for_glue`).
    With ``reverse_orientation`` False the glue respects the orientation of
    an orientable base.
    """
    nx, ny = spec.resolution
    a1, a2 = spec.arc1, spec.arc2
    if a1.chain == a2.chain and _arcs_overlap(a1, a2, base.chain_length(a1.chain)):
        raise InvalidArgument("glue arcs overlap")
    piece = spec.epsilon**2 / nx
    p1 = _arc_vertices(base, a1, nx, piece)
    p2 = _arc_vertices(base, a2, nx, piece)
    if set(p1) & set(p2):
        raise InvalidArgument("glue arcs share vertices")

    rect = make_rectangle_mesh(spec.epsilon, spec.h, nx, ny)
    bottom = [int(v) for v in rect.vertex_sets["I_bottom"]]
    top = [int(v) for v in rect.vertex_sets["I_top"]]
    # orientation-compatible identification traverses the rectangle side backwards
    ident: dict[int, int] = {}
    for k, v in enumerate(p1):
        ident[bottom[nx - k]] = v
    for k, v in enumerate(p2):
        ident[top[nx - k] if spec.reversed else top[k]] = v

    nb = base.n_vertices
    rmap = np.empty(rect.n_vertices, dtype=np.int64)
    nxt = nb
    for r in range(rect.n_vertices):
        if r in ident:
            rmap[r] = ident[r]
        else:
            rmap[r] = nxt
            nxt += 1

    lengths: dict[tuple[int, int], float] = {
        (int(a), int(b)): float(l) for (a, b), l in zip(base.edges, base.lengths)
    }
    for (a, b), l in zip(rect.edges, rect.lengths):
        u, v = int(rmap[a]), int(rmap[b])
        key = (min(u, v), max(u, v))
        if key in lengths:
            if abs(lengths[key] - l) > GLUE_RTOL * l:
                raise GlueMismatch("identified edges have different lengths")
            continue
        lengths[key] = float(l)

    tris = np.vstack([base.triangles, rmap[rect.triangles]])
    labels: dict[tuple[int, int], str] = {}
    for u, v, lab in base.boundary_edges():
        labels[(min(u, v), max(u, v))] = lab
    for u, v, lab in rect.boundary_edges():
        a, b = int(rmap[u]), int(rmap[v])
        labels.setdefault((min(a, b), max(a, b)), lab)
    chains = _chains_from_triangles(tris, labels)

    nt = len(base.triangles)
    regions = dict(base.regions) if base.regions else {"base": np.arange(nt)}
    name = "rect"
    i = 1
    while name in regions:
        name = f"rect_{i}"
        i += 1
    regions[name] = nt + np.arange(len(rect.triangles))
    vsets = dict(base.vertex_sets)
    suffix = name[4:]
    vsets[f"rect{suffix}"] = rmap.copy()
    vsets[f"I_bottom{suffix}"] = rmap[bottom]
    vsets[f"I_top{suffix}"] = rmap[top]
    vsets[f"I_eps{suffix}"] = np.concatenate([rmap[bottom], rmap[top]])
    return Mesh(nxt, tris, (np.array(list(lengths.keys())), np.array(list(lengths.values()))), chains,
                regions=regions, vertex_sets=vsets)


def rectangle_submesh(glued: Mesh, region: str = "rect") -> tuple[Mesh, np.ndarray, np.ndarray]:
    """Rectangle part of a glued mesh in rectangle-local numbering.

    Returns (mesh, glued ids of local vertices, local ids of the I-sides).
    """
    suffix = region[4:]
    key = f"rect{suffix}"
    if region not in glued.regions or key not in glued.vertex_sets:
        raise InvalidArgument(f"mesh has no rectangle region {region!r}")
    gids = glued.vertex_sets[key]
    local = {int(g): i for i, g in enumerate(gids)}
    tris = np.array([[local[int(v)] for v in glued.triangles[t]] for t in glued.regions[region]])
    e = np.unique(np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1), axis=0)
    lens = glued.lengths[glued.edge_index(gids[e[:, 0]], gids[e[:, 1]])]
    seam = glued.vertex_sets[f"I_eps{suffix}"]
    seam_local = np.array([local[int(g)] for g in seam])
    # rectangle labels: seam edges are I, others free
    seam_set = set(int(s) for s in seam_local)
    labels = {}
    for a, b in e:
        labels[(int(a), int(b))] = "I" if (a in seam_set and b in seam_set) else "free"
    chains = _chains_from_triangles(tris, labels)
    sub = Mesh(len(gids), tris, (e, lens), chains)
    return sub, gids, seam_local


# -- text format --------------------------------------------------------------

HEADER = "steklov-mesh v1"


def to_text(mesh: Mesh) -> str:
    lines = [HEADER]
    for v in range(mesh.n_vertices):
        if mesh.coords is not None:
            x, y = mesh.coords[v]
            lines.append(f"v {v} {float(x)!r} {float(y)!r}")
        else:
            lines.append(f"v {v}")
    for a, b, c in mesh.triangles:
        lines.append(f"t {a} {b} {c}")
    for (a, b), l in zip(mesh.edges, mesh.lengths):
        lines.append(f"e {a} {b} {float(l)!r}")
    for c in mesh.chains:
        if len(set(c.labels)) == 1:
            lines.append(f"bc {c.labels[0]} " + " ".join(map(str, c.vertices)))
            continue
        # label runs as open paths; start at a label change
        n = len(c.vertices)
        start = next(i for i in range(n) if c.labels[i] != c.labels[i - 1])
        i = 0
        while i < n:
            j = i
            lab = c.labels[(start + i) % n]
            while j < n and c.labels[(start + j) % n] == lab:
                j += 1
            ids = [c.vertices[(start + q) % n] for q in range(i, j + 1)]
            lines.append(f"bc {lab} " + " ".join(map(str, ids)))
            i = j
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Mesh:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != HEADER:
        raise InvalidMesh(f"missing header {HEADER!r}")
    ids: dict[str, int] = {}
    xy: list[tuple[float, float] | None] = []
    tris, edges, lens, runs = [], [], [], []
    try:
        for ln in lines[1:]:
            tok = ln.split()
            kind = tok[0]
            if kind == "v":
                ids[tok[1]] = len(ids)
                xy.append((float(tok[2]), float(tok[3])) if len(tok) >= 4 else None)
            elif kind == "t":
                tris.append([ids[x] for x in tok[1:4]])
            elif kind == "e":
                edges.append((ids[tok[1]], ids[tok[2]]))
                lens.append(float(tok[3]))
            elif kind == "bc":
                runs.append((tok[1], [ids[x] for x in tok[2:]]))
            else:
                raise InvalidMesh(f"unknown record {kind!r}")
    except (KeyError, IndexError, ValueError) as exc:
        raise InvalidMesh(f"malformed mesh line: {exc}") from exc
    tris_a = np.array(tris, dtype=np.int64).reshape(-1, 3)
    labels: dict[tuple[int, int], str] = {}
    for lab, vs in runs:
        for a, b in zip(vs[:-1], vs[1:]):
            labels[(min(a, b), max(a, b))] = lab
    count: dict[tuple[int, int], int] = defaultdict(int)
    for t in tris_a:
        for k in range(3):
            a, b = int(t[k]), int(t[(k + 1) % 3])
            count[(min(a, b), max(a, b))] += 1
    for lab, vs in runs:
        a, b = vs[-1], vs[0]
        key = (min(a, b), max(a, b))
        if a != b and count.get(key) == 1 and key not in labels:
            labels[key] = lab
    missing = [e for e, c in count.items() if c == 1 and e not in labels]
    if missing:
        raise InvalidMesh(f"unlabeled boundary edge {missing[0]}")
    chains = _chains_from_triangles(tris_a, labels)
    coords = None
    if xy and all(p is not None for p in xy):
        coords = np.array(xy, dtype=float)
    mesh = Mesh(len(ids), tris_a, (np.array(edges), np.array(lens)), chains)
    if coords is not None and mesh.coords_consistent(coords):
        mesh = mesh.replace(coords=coords)
    return mesh


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(mesh))


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        return from_text(fh.read())
