"""Closed-form spectra: thin rectangle, unit disk, limit spectrum and the h-window."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InfeasibleWindow, InvalidArgument

WINDOW_MARGIN = 0.05
DISTINCT_RTOL = 1e-2


class RectCondition(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "RectCondition":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InvalidArgument(f"condition must be dirichlet or neumann, got {value!r}") from None


@dataclass(frozen=True)
class RectangleEig:
    family: str  # "F" (cosh in x) or "G" (sinh in x)
    j: int
    mu: float
    value: float


def _check_eh(epsilon: float, h: float) -> None:
    if not (epsilon > 0 and h > 0) or not (math.isfinite(epsilon) and math.isfinite(h)):
        raise InvalidArgument("epsilon and h must be positive and finite")


def f_value(epsilon: float, h: float, j: int) -> float:
    """mu tanh(eps^2 mu / 2) with mu = j pi / (eps h); zero for j = 0."""
    mu = j * math.pi / (epsilon * h)
    return mu * math.tanh(0.5 * epsilon**2 * mu)


def g_value(epsilon: float, h: float, j: int) -> float:
    """mu coth(eps^2 mu / 2); the j = 0 limit is 2/eps^2."""
    if j == 0:
        return 2.0 / epsilon**2
    mu = j * math.pi / (epsilon * h)
    return mu / math.tanh(0.5 * epsilon**2 * mu)


def rectangle_eigs(epsilon: float, h: float, condition, count: int) -> list[RectangleEig]:
    """Lowest ``count`` Steklov eigenvalues of R_{eps,h} with condition on the short sides.

    Dirichlet uses y-modes sin(j pi y'/(eps h)), j >= 1; Neumann uses
    cos(j pi y'/(eps h)), j >= 0, where y' is measured from a short side.
    """
    _check_eh(epsilon, h)
    cond = RectCondition.parse(condition)
    if count < 0:
        raise InvalidArgument("count must be non-negative")
    j0 = 1 if cond is RectCondition.DIRICHLET else 0
    # both families increase in j, so a two-way merge suffices
    heap: list[tuple[float, str, int]] = [(f_value(epsilon, h, j0), "F", j0), (g_value(epsilon, h, j0), "G", j0)]
    out: list[RectangleEig] = []
    while len(out) < count:
        val, fam, j = heapq.heappop(heap)
        out.append(RectangleEig(fam, j, j * math.pi / (epsilon * h), val))
        nxt = f_value(epsilon, h, j + 1) if fam == "F" else g_value(epsilon, h, j + 1)
        heapq.heappush(heap, (nxt, fam, j + 1))
    return out


def rectangle_spectrum(epsilon: float, h: float, condition, count: int) -> np.ndarray:
    return np.array([e.value for e in rectangle_eigs(epsilon, h, condition, count)])


def limit_rectangle_eig(j: int, h: float) -> float:
    """rho_j(h) = j^2 pi^2 / (2 h^2)."""
    if int(j) != j or j < 1:
        raise InvalidArgument("j must be a positive integer")
    if not h > 0:
        raise InvalidArgument("h must be positive")
    return (j * math.pi) ** 2 / (2 * h * h)


def disk_spectrum(count: int) -> np.ndarray:
    """0, 1, 1, 2, 2, ... for the unit disk."""
    if count < 1:
        raise InvalidArgument("count must be positive")
    return np.array([(i + 1) // 2 for i in range(count)], dtype=float)


def limit_spectrum(base_values: Sequence[float], h: float, count: int) -> np.ndarray:
    """Sorted union of the base spectrum with rho_1(h), rho_2(h), ..."""
    base = np.asarray(base_values, dtype=float)
    if np.any(np.diff(base) < 0):
        raise InvalidArgument("base values must be ascending")
    if not h > 0:
        raise InvalidArgument("h must be positive")
    if count < 1:
        raise InvalidArgument("count must be positive")
    rho = [limit_rectangle_eig(j, h) for j in range(1, count + 1)]
    vals = np.sort(np.concatenate([base, rho]))
    if len(vals) < count:
        raise InvalidArgument("not enough base values for the requested count")
    return vals[:count]


def h_star(sigma1: float) -> float:
    """Aspect at which rho_1 meets sigma_1: pi / sqrt(2 sigma_1)."""
    if not sigma1 > 0:
        raise InvalidArgument("sigma_1 must be positive")
    return math.pi / math.sqrt(2 * sigma1)


def _h_for(value: float) -> float:
    """Inverse of rho_1."""
    return math.pi / math.sqrt(2 * value)


@dataclass(frozen=True)
class Window:
    h0: float
    h1: float
    h_star: float

    def __post_init__(self) -> None:
        if not 0 < self.h0 < self.h_star < self.h1:
            raise InfeasibleWindow(f"need 0 < h0 < h_star < h1, got {self.h0}, {self.h_star}, {self.h1}")


def window_inequalities(sigma1: float, sigma_next: float, h0: float, h1: float) -> list[tuple[str, float, float]]:
    """The chain rho_1(h1) < sigma_1 < rho_1(h0) < rho_2(h1) < sigma_next as (name, lhs, rhs) pairs."""
    r1h1 = limit_rectangle_eig(1, h1)
    r1h0 = limit_rectangle_eig(1, h0)
    r2h1 = limit_rectangle_eig(2, h1)
    return [
        ("rho1(h1) < sigma1", r1h1, sigma1),
        ("sigma1 < rho1(h0)", sigma1, r1h0),
        ("rho1(h0) < rho2(h1)", r1h0, r2h1),
        ("rho2(h1) < sigma_next", r2h1, sigma_next),
    ]


def window_is_feasible(sigma1: float, sigma_next: float, h0: float, h1: float, margin: float = 0.0) -> bool:
    return all(lhs * (1 + margin) < rhs for _, lhs, rhs in window_inequalities(sigma1, sigma_next, h0, h1))


def admissible_window(sigma1: float, sigma_next: float, margin: float = WINDOW_MARGIN) -> Window:
    """Widest (h0, h1) satisfying the window chain with a multiplicative margin.

    With m = 1 + margin every link lhs < rhs is tightened to m*lhs <= rhs.
    The links force h1 <= 2 h0 / sqrt(m) and h0 <= h_star / sqrt(m), so the
    widest window is h0 = h_star/sqrt(m), h1 = 2 h_star/m. It is feasible
    iff sigma_next >= m^3 sigma_1.
    """
    if not (sigma1 > 0 and math.isfinite(sigma_next)):
        raise InfeasibleWindow("sigma_1 must be positive")
    if not sigma_next > sigma1:
        raise InfeasibleWindow("sigma_next must exceed sigma_1")
    m = 1.0 + margin
    hs = h_star(sigma1)
    h0 = hs / math.sqrt(m)
    h1 = 2 * hs / m
    if sigma_next < m**3 * sigma1:
        raise InfeasibleWindow(
            f"no window: sigma_next/sigma_1 = {sigma_next / sigma1:.4g} is below {m**3:.4g}"
        )
    return Window(h0, h1, hs)


def next_distinct(values: Sequence[float], index: int = 1, rtol: float = DISTINCT_RTOL) -> float:
    """Smallest value strictly above values[index] beyond a relative cluster tolerance."""
    v = np.asarray(values, dtype=float)
    ref = v[index]
    above = v[v > ref * (1 + rtol) + 1e-12]
    if len(above) == 0:
        raise InfeasibleWindow("no eigenvalue above sigma_1 in the supplied list")
    return float(above.min())
