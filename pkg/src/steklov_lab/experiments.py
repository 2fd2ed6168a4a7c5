"""Glued-surface experiments: convergence in epsilon, h-sweeps, crossings, lemmas.

All reports are plain dataclasses of floats, lists and strings so that they
serialize to JSON and back without loss (see :mod:`steklov_lab.reports`).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import analytic
from .assembly import boundary_length
from .errors import InvalidArgument, NoCrossing
from .mesh import (
    BoundaryArc,
    GlueSpec,
    Mesh,
    align_for_glue,
    glue,
    make_annulus_mesh,
    make_disk_mesh,
    scale,
    surface_topology,
)
from .steklov import SteklovProblem, boundary_mass_split, glued_regions, solve_steklov

BaseFactory = Callable[[float, int], Mesh]
Base = Union[Mesh, BaseFactory]

DEFAULT_RESOLUTION = (8, 64)
DEFAULT_COUNT = 6
GOLDEN = (math.sqrt(5) - 1) / 2
OVERLAP_TIE = 1e-3
NORMAL_LENGTH = 2 * math.pi


# -- bases ----------------------------------------------------------------------


@dataclass(frozen=True)
class ClusteredDisk:
    """Unit-disk factory refined at the antipodal attachment points theta = 0, pi.

    Near the arcs the boundary spacing matches the rectangle's I-side
    spacing eps^2/nx.
    """

    n_radial: int = 20
    n_angular: int = 160
    growth: float = 0.2

    def __call__(self, epsilon: float, nx: int) -> Mesh:
        s_far = 2 * math.pi / self.n_angular
        # epsilon = 0 means no strip, so no refinement is needed
        factor = max(1.0, s_far / (epsilon**2 / nx)) if epsilon > 0 else 1.0
        return make_disk_mesh(self.n_radial, self.n_angular, [0.0, math.pi], factor, self.growth)


def _base_mesh(base: Base, epsilon: float, nx: int) -> Mesh:
    return base if isinstance(base, Mesh) else base(epsilon, nx)


def antipodal_spec(mesh: Mesh, epsilon: float, h: float, resolution=DEFAULT_RESOLUTION,
                   reverse: bool = False) -> GlueSpec:
    """Arcs centred at arclength 0 and L/2 of the first chain."""
    L = mesh.chain_length(0)
    w = epsilon**2
    a1 = BoundaryArc.centered(mesh, 0, 0.0, w)
    a2 = BoundaryArc.centered(mesh, 0, 0.5 * L, w)
    return GlueSpec(epsilon, h, a1, a2, reverse, tuple(resolution))


class GluedFamily:
    """Sigma_{eps,h} for fixed eps and varying h with identical vertex numbering.

    The base is aligned once; only the rectangle's edge lengths change with h.
    """

    def __init__(self, base: Base, epsilon: float, resolution=DEFAULT_RESOLUTION,
                 reverse: bool = False) -> None:
        if not epsilon > 0:
            raise InvalidArgument("epsilon must be positive")
        self.epsilon = float(epsilon)
        self.resolution = tuple(int(r) for r in resolution)
        raw = _base_mesh(base, epsilon, self.resolution[0])
        spec = antipodal_spec(raw, epsilon, 1.0, self.resolution, reverse)
        self.base, self.spec = align_for_glue(raw, spec)

    def mesh(self, h: float) -> Mesh:
        s = self.spec
        return glue(self.base, GlueSpec(self.epsilon, h, s.arc1, s.arc2, s.reverse_orientation, s.resolution))

    def solve(self, h: float, count: int = DEFAULT_COUNT):
        g = self.mesh(h)
        return g, solve_steklov(SteklovProblem(g, count=count))


@dataclass
class PointResult:
    h: float
    values: list
    base_fraction: list
    vectors: np.ndarray
    mass: np.ndarray
    F: np.ndarray


def _solve_point(args) -> PointResult:
    fam, h, count = args
    g, s = fam.solve(h, count)
    frac = boundary_mass_split(s, glued_regions(g))["base"]
    return PointResult(float(h), [float(v) for v in s.values], [float(x) for x in frac], s.vectors, s.B, s.partition.F)


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# -- convergence -------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    h: float
    eps: list
    J: int
    eigenvalues: list  # per eps, sigma_0..sigma_J
    targets: list
    deviations: list  # per eps, max_j |sigma_j - target_j|
    base_values: list
    trend_decreasing: bool

    def rows(self) -> list[dict]:
        out = []
        for e, vals in zip(self.eps, self.eigenvalues):
            for j, v in enumerate(vals):
                out.append(dict(eps=e, h=self.h, j=j, sigma=v, target=self.targets[j], deviation=abs(v - self.targets[j])))
        return out


def base_spectrum(mesh: Mesh, count: int) -> np.ndarray:
    return solve_steklov(SteklovProblem(mesh, count=count)).values


def _converge_one(args):
    base, h, e, J, resolution = args
    fam = GluedFamily(base, e, resolution)
    _, s = fam.solve(h, J + 1)
    return [float(v) for v in s.values]


def converge_eps(base: Base, h: float, eps_list: Sequence[float], J: int = 4,
                 resolution=DEFAULT_RESOLUTION, base_values: Sequence[float] | None = None,
                 jobs: int = 1) -> ConvergenceReport:
    """Glued spectra for each eps against the limit spectrum at fixed h.

    ``base_values`` defaults to the FEM spectrum of the (unaligned) base; for a
    factory base the first eps in the list supplies it.
    """
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps):
        raise InvalidArgument("eps list must be non-empty and positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidArgument("eps list must be strictly decreasing")
    if J < 0 or not h > 0:
        raise InvalidArgument("need J >= 0 and h > 0")
    if base_values is None:
        base_values = base_spectrum(_base_mesh(base, eps[-1], resolution[0]), J + 1)
    targets = analytic.limit_spectrum(list(base_values), h, J + 1)
    vals = _map(_converge_one, [(base, h, e, J, tuple(resolution)) for e in eps], jobs)
    dev = [float(np.max(np.abs(np.array(v) - targets))) for v in vals]
    trend = all(b < a for a, b in zip(dev, dev[1:]))
    return ConvergenceReport(float(h), eps, int(J), vals, [float(t) for t in targets], dev,
                             [float(b) for b in base_values], trend)


# -- h sweeps --------------------------------------------------------------------


@dataclass
class SweepReport:
    eps: float
    h: list
    eigenvalues: list  # per h, sigma_0..sigma_{K-1}
    base_fraction: list  # per h, boundary-of-Sigma mass fraction of each eigenvector
    tracked: list  # per h, index of the tracked rectangle-localized branch
    m: list  # per h, base fraction of the tracked branch
    gap: list  # sigma_2 - sigma_1
    crossing_flags: list  # per h, True where the overlap choice was ambiguous
    h_eps: float | None  # interior grid minimum of the gap, if any
    window: list

    def rows(self) -> list[dict]:
        out = []
        for i, h in enumerate(self.h):
            for j, v in enumerate(self.eigenvalues[i]):
                out.append(dict(eps=self.eps, h=h, j=j, sigma=v, base_fraction=self.base_fraction[i][j],
                                tracked=int(self.tracked[i] == j), gap=self.gap[i]))
        return out


def _window_pair(window) -> tuple[float, float]:
    if isinstance(window, analytic.Window):
        return window.h0, window.h1
    h0, h1 = (float(x) for x in window)
    if not 0 < h0 < h1:
        raise InvalidArgument("window needs 0 < h0 < h1")
    return h0, h1


def _overlaps(prev: PointResult, cur: PointResult, col: int) -> np.ndarray:
    M = 0.5 * (prev.mass + cur.mass)
    return np.abs(prev.vectors[:, col] @ M @ cur.vectors)


def _cluster_size(values: Sequence[float], rtol: float = analytic.DISTINCT_RTOL) -> int:
    """mult(sigma_1) of a base spectrum, clustered with a relative tolerance."""
    v = np.asarray(values)
    return int(np.sum(np.abs(v[1:] - v[1]) <= rtol * v[1]))


def _track(points: list[PointResult], start_group: int) -> tuple[list[int], list[bool]]:
    first = points[0]
    cand = list(range(1, min(1 + start_group, len(first.values))))
    tracked = [min(cand, key=lambda j: first.base_fraction[j])]
    flags = [False]
    for prev, cur in zip(points, points[1:]):
        ov = _overlaps(prev, cur, tracked[-1])
        order = np.argsort(ov)[::-1]
        tracked.append(int(order[0]))
        flags.append(bool(len(ov) > 1 and ov[order[0]] - ov[order[1]] < OVERLAP_TIE))
    return tracked, flags


def sweep_h(base: Base, epsilon: float, window, grid: int = 27, count: int = DEFAULT_COUNT,
            resolution=DEFAULT_RESOLUTION, group: int | None = None, jobs: int = 1,
            family: GluedFamily | None = None) -> SweepReport:
    """Solve on a uniform h grid over the window and follow the rectangle branch.

    The branch starts at h0 as the least base-concentrated vector among the
    lowest ``group`` nonzero modes (default mult(sigma_1)+1 of the base) and
    is continued by maximal B-overlap.
    """
    h0, h1 = _window_pair(window)
    if grid < 2:
        raise InvalidArgument("grid needs at least two points")
    fam = family or GluedFamily(base, epsilon, resolution)
    if group is None:
        group = _cluster_size(base_spectrum(fam.base, 4)) + 1
    hs = np.linspace(h0, h1, grid)
    pts = _map(_solve_point, [(fam, float(h), count) for h in hs], jobs)
    tracked, flags = _track(pts, group)
    gaps = [p.values[2] - p.values[1] for p in pts]
    h_eps = None
    if grid > 2:
        i = int(np.argmin(gaps))
        if 0 < i < grid - 1:
            h_eps = float(hs[i])
    return SweepReport(
        eps=float(epsilon),
        h=[float(h) for h in hs],
        eigenvalues=[p.values for p in pts],
        base_fraction=[p.base_fraction for p in pts],
        tracked=tracked,
        m=[p.base_fraction[t] for p, t in zip(pts, tracked)],
        gap=[float(g) for g in gaps],
        crossing_flags=flags if grid > 2 else [False] * grid,
        h_eps=h_eps,
        window=[h0, h1],
    )


@dataclass
class MultiplicityResult:
    eps: float
    h_eps: float
    sigma1: float
    sigma2: float
    rel_gap: float
    tol_gap: float
    reached: bool
    evaluations: int
    bracket: list
    exchange: bool  # sigma_1 eigenvector changes identity across the bracket

    @property
    def gap(self) -> float:
        return self.sigma2 - self.sigma1


def find_h_multiplicity(base: Base, epsilon: float, window, tol_gap: float = 1e-2, grid: int = 14,
                        h_tol: float = 1e-5, count: int = 4, resolution=DEFAULT_RESOLUTION,
                        jobs: int = 1, family: GluedFamily | None = None,
                        polish: bool = False) -> MultiplicityResult:
    """Locate h in the window where sigma_1 = sigma_2 by golden-section on the gap.

    A coarse grid brackets the minimum of (sigma_2 - sigma_1); the bracket
    must be interior to the window, otherwise :class:`NoCrossing` is raised.
    A grid point already within tol_gap is returned as is unless ``polish``
    asks for refinement of an interior minimum. Refinement stops when the
    relative gap falls below tol_gap/100 or the bracket is narrower than h_tol.
    """
    h0, h1 = _window_pair(window)
    if not tol_gap > 0:
        raise InvalidArgument("tol_gap must be positive")
    if grid < 3:
        raise InvalidArgument("grid needs at least three points")
    fam = family or GluedFamily(base, epsilon, resolution)
    hs = np.linspace(h0, h1, grid)
    pts = _map(_solve_point, [(fam, float(h), count) for h in hs], jobs)
    rel = np.array([(p.values[2] - p.values[1]) / p.values[1] for p in pts])
    evals = grid
    i = int(np.argmin(rel))
    interior = 0 < i < grid - 1
    if not interior and rel[i] > tol_gap:
        raise NoCrossing(
            f"gap sigma_2 - sigma_1 is smallest at the window edge h={hs[i]:.4g}; no interior crossing in [{h0}, {h1}]"
        )
    lo, hi = max(i - 1, 0), min(i + 1, grid - 1)
    exchange = bool(_overlaps(pts[lo], pts[hi], 1)[1] < 0.5)
    if rel[i] <= tol_gap and not (polish and interior):
        p = pts[i]
        return MultiplicityResult(float(epsilon), float(hs[i]), p.values[1], p.values[2], float(rel[i]),
                                  tol_gap, True, evals, [float(hs[lo]), float(hs[hi])], exchange)

    cache: dict[float, PointResult] = {}

    def f(h: float) -> float:
        nonlocal evals
        if h not in cache:
            cache[h] = _solve_point((fam, h, count))
            evals += 1
        v = cache[h].values
        return (v[2] - v[1]) / v[1]

    a, b = float(hs[i - 1]), float(hs[i + 1])
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > h_tol and min(fc, fd) > tol_gap * 1e-2:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best = min(cache, key=lambda h: f(h))
    p = cache[best]
    r = f(best)
    return MultiplicityResult(float(epsilon), float(best), p.values[1], p.values[2], float(r), tol_gap,
                              bool(r <= tol_gap), evals, [a, b], exchange)


# -- lemma inequalities and monotonicity ---------------------------------------------


@dataclass
class LemmaReport:
    eps: float
    h: float
    sigma_eps: float
    sigma0_D_rect: float
    sigma1_N_base: float
    upper_slack: float  # (sigma0_D - sigma_eps) / sigma0_D
    lower_slack: float  # (sigma_eps - sigma1_N) / sigma_eps
    upper_holds: bool
    lower_holds: bool | None  # only judged at a multiplicity point
    tol: float


def check_lemma_inequalities(base: Base, epsilon: float, h: float, at_multiplicity: bool = False,
                             tol: float = 1e-6, resolution=DEFAULT_RESOLUTION,
                             family: GluedFamily | None = None) -> LemmaReport:
    """sigma_1^N(Sigma, I_eps) <= sigma_1(Sigma_eps) <= sigma_0^D(R_eps, I_eps).

    The Neumann problem uses the aligned base, so I_eps is exactly the
    glued arcs.
    """
    fam = family or GluedFamily(base, epsilon, resolution)
    _, s = fam.solve(h, 3)
    sig = float(s.values[1])
    d0 = float(analytic.rectangle_spectrum(epsilon, h, "dirichlet", 1)[0])
    arcs = {lab: "neumann" for lab in ("arc1", "arc2") if lab in fam.base.labels}
    n1 = float(solve_steklov(SteklovProblem(fam.base, arcs, count=2)).values[1])
    up = (d0 - sig) / d0
    lo = (sig - n1) / sig
    return LemmaReport(float(epsilon), float(h), sig, d0, n1, up, lo, bool(up >= -tol),
                       bool(lo >= -tol) if at_multiplicity else None, tol)


@dataclass
class MonotonicityReport:
    eps: float
    verdict: str  # PASS, FAIL or NOT-APPLICABLE
    P_base: float
    P_glued: float
    threshold: float
    margin: float
    h0: float
    h1: float
    h_eps: float | None
    sigma1_base: float
    sigma1_glued: float | None
    length_base: float
    length_glued: float | None
    normalization: float  # factor applied to the base to bring its length to 2 pi
    raw_P_base: float
    multiplicity: MultiplicityResult | None = None

    NESTED = {"multiplicity": MultiplicityResult}


def normalize_length(mesh: Mesh, target: float = NORMAL_LENGTH) -> tuple[Mesh, float]:
    """Scale so the whole boundary has length ``target``; exact for power-of-two ratios."""
    L = boundary_length(mesh)
    t = target / L
    if abs(math.log2(t) - round(math.log2(t))) < 1e-12:
        t = 2.0 ** round(math.log2(t))
    return scale(mesh, t), t


def verify_monotonicity(base: Base, epsilon: float, window=None, tol_gap: float = 1e-2,
                        resolution=DEFAULT_RESOLUTION, grid: int = 14, jobs: int = 1) -> MonotonicityReport:
    """Compare sigma_1 * L of Sigma_{eps,h_eps} with that of Sigma.

    The base is first scaled to boundary length 2 pi (the unit-disk value),
    so the verdict does not depend on the base's scale. PASS requires
    P_glued - P_base >= 0.5 * eps * h0 * sigma_1(Sigma). ``window`` defaults
    to the admissible window of the base spectrum.
    """
    if not epsilon >= 0:
        raise InvalidArgument("epsilon must be non-negative")
    nx = resolution[0]
    raw = _base_mesh(base, epsilon, nx)
    raw_vals = base_spectrum(raw, 4)
    raw_P = float(raw_vals[1] * boundary_length(raw))
    norm, t = normalize_length(raw)
    vals = raw_vals / t
    s1 = float(vals[1])
    Lb = boundary_length(norm)
    P_base = s1 * Lb
    if window is None:
        win = analytic.admissible_window(s1, analytic.next_distinct(vals))
        h0, h1 = win.h0, win.h1
    else:
        h0, h1 = _window_pair(window)
    if epsilon == 0:
        return MonotonicityReport(0.0, "NOT-APPLICABLE", P_base, P_base, P_base, 0.0, h0, h1, None, s1, s1,
                                  Lb, Lb, t, raw_P)
    margin = 0.5 * epsilon * h0 * s1
    fam = GluedFamily(norm, epsilon, resolution)
    mult = find_h_multiplicity(norm, epsilon, (h0, h1), tol_gap, grid=grid, resolution=resolution,
                               jobs=jobs, family=fam, polish=True)
    g, s = fam.solve(mult.h_eps, 3)
    sg = float(s.values[1])
    Lg = boundary_length(g)
    P = sg * Lg
    verdict = "PASS" if P - P_base >= margin else "FAIL"
    return MonotonicityReport(float(epsilon), verdict, P_base, P, P_base + margin, margin, h0, h1,
                              mult.h_eps, s1, sg, Lb, Lg, t, raw_P, mult)


# -- topology ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttachmentResult:
    orientable: bool
    genus: int
    k: int

    def __str__(self) -> str:
        kind = "orientable" if self.orientable else "non-orientable"
        return f"{kind} genus={self.genus} k={self.k}"


def topology_of_attachment(orientable: bool, genus: int, k: int, same_component: bool,
                           reverse: bool = False) -> AttachmentResult:
    """Topological type after attaching the strip; ``genus`` is non-orientable genus if not orientable."""
    if genus < 0 or k < 1:
        raise InvalidArgument("need genus >= 0 and k >= 1")
    if not same_component and k < 2:
        raise InvalidArgument("arcs on different components need k >= 2")
    if orientable:
        if same_component:
            return AttachmentResult(False, 2 * genus + 1, k) if reverse else AttachmentResult(True, genus, k + 1)
        return AttachmentResult(False, 2 * genus + 2, k - 1) if reverse else AttachmentResult(True, genus + 1, k - 1)
    if same_component:
        return AttachmentResult(False, genus, k + 1)
    return AttachmentResult(False, genus + 1, k)


@dataclass
class TopologyCheck:
    same_component: bool
    reverse: bool
    predicted: str
    measured: str
    chi_base: int
    chi_glued: int
    chains_base: int
    chains_glued: int
    agrees: bool


def realize_attachment(same_component: bool, reverse: bool, epsilon: float = 0.2,
                       resolution=(4, 8)) -> TopologyCheck:
    """Glue a strip onto a disk (same component) or an annulus (different components)."""
    if same_component:
        base = make_disk_mesh(6, 40)
        L = base.chain_length(0)
        a1 = BoundaryArc.centered(base, 0, 0.0, epsilon**2)
        a2 = BoundaryArc.centered(base, 0, 0.5 * L, epsilon**2)
    else:
        base = make_annulus_mesh(4, 40)
        a1 = BoundaryArc.centered(base, 0, 0.0, epsilon**2)
        a2 = BoundaryArc.centered(base, 1, 0.0, epsilon**2)
    aligned, spec = align_for_glue(base, GlueSpec(epsilon, 2.0, a1, a2, reverse, tuple(resolution)))
    g = glue(aligned, spec)
    tb, tg = surface_topology(base), surface_topology(g)
    pred = topology_of_attachment(tb.orientable, tb.genus, tb.boundary_components, same_component, reverse)
    meas = AttachmentResult(tg.orientable, tg.genus, tg.boundary_components)
    chi_pred = 2 - 2 * pred.genus - pred.k if pred.orientable else 2 - pred.genus - pred.k
    ok = pred == meas and chi_pred == tg.euler_characteristic and tg.euler_characteristic == tb.euler_characteristic - 1
    return TopologyCheck(same_component, reverse, str(pred), str(meas), tb.euler_characteristic,
                         tg.euler_characteristic, tb.boundary_components, tg.boundary_components, ok)
