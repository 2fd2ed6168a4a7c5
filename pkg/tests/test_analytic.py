from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steklov_lab.analytic import (
    Window,
    admissible_window,
    disk_spectrum,
    f_value,
    g_value,
    h_star,
    limit_rectangle_eig,
    limit_spectrum,
    next_distinct,
    rectangle_eigs,
    rectangle_spectrum,
    window_is_feasible,
)
from steklov_lab.errors import InfeasibleWindow, InvalidArgument

# mu tanh(eps^2 mu / 2) and mu coth(eps^2 mu / 2) at eps = 0.2, h = 1, evaluated
# independently with mpmath at 30 digits; the FEM refinement study in the
# acceptance suite converges to the same numbers at second order.
DIRICHLET_02_1 = [4.778616783, 17.495319218, 34.700081500, 51.634211575]


def test_dirichlet_rectangle_values():
    np.testing.assert_allclose(rectangle_spectrum(0.2, 1.0, "dirichlet", 4), DIRICHLET_02_1, rtol=1e-9)
    fams = [(e.family, e.j) for e in rectangle_eigs(0.2, 1.0, "dirichlet", 4)]
    assert fams == [("F", 1), ("F", 2), ("F", 3), ("G", 1)]


def test_mpmath_oracle():
    import mpmath as mp

    mp.mp.dps = 30
    eps = mp.mpf("0.2")
    mu = [j * mp.pi / eps for j in range(1, 5)]
    vals = [m * mp.tanh(eps**2 * m / 2) for m in mu] + [m * mp.coth(eps**2 * m / 2) for m in mu]
    got = sorted(float(v) for v in vals)[:4]
    np.testing.assert_allclose(got, DIRICHLET_02_1, rtol=1e-10)


def test_first_value_grows_as_eps_shrinks():
    vals = [rectangle_spectrum(e, 1.0, "dirichlet", 1)[0] for e in (0.2, 0.1, 0.05)]
    np.testing.assert_allclose(vals, [4.778617, 4.894612, 4.924680], rtol=1e-6)
    assert vals[0] < vals[1] < vals[2] < limit_rectangle_eig(1, 1.0)


def test_neumann_starts_at_zero_and_matches_dirichlet():
    d = rectangle_spectrum(0.15, 2.5, "dirichlet", 3)
    n = rectangle_spectrum(0.15, 2.5, "neumann", 4)
    assert n[0] == 0.0
    assert n[1] == d[0]
    assert g_value(0.15, 2.5, 0) == pytest.approx(2 / 0.15**2)


@settings(max_examples=80, deadline=None)
@given(eps=st.floats(0.01, 1.0), h=st.floats(0.1, 10.0), j=st.integers(1, 6))
def test_closed_form_relations(eps, h, j):
    f, g = f_value(eps, h, j), g_value(eps, h, j)
    rho = limit_rectangle_eig(j, h)
    assert f <= g  # equal only once tanh saturates in floating point
    # tanh x <= x gives f <= rho, with relative defect at most x^2/3
    x = 0.5 * eps**2 * j * math.pi / (eps * h)
    assert f <= rho * (1 + 1e-12)
    assert (rho - f) / rho <= x * x / 3 + 1e-12
    assert f_value(eps, h, j + 1) > f


@settings(max_examples=40, deadline=None)
@given(eps=st.floats(0.05, 1.0), h=st.floats(0.1, 10.0), cond=st.sampled_from(["dirichlet", "neumann"]))
def test_spectrum_sorted(eps, h, cond):
    v = rectangle_spectrum(eps, h, cond, 8)
    assert np.all(np.diff(v) >= 0)


def test_rectangle_validation():
    with pytest.raises(InvalidArgument):
        rectangle_spectrum(0.0, 1.0, "dirichlet", 2)
    with pytest.raises(InvalidArgument):
        rectangle_spectrum(0.2, 1.0, "robin", 2)


def test_disk_and_limit_spectrum():
    np.testing.assert_array_equal(disk_spectrum(5), [0, 1, 1, 2, 2])
    np.testing.assert_allclose(limit_spectrum(disk_spectrum(5), 2.5, 5), [0, 0.789568, 1, 1, 2], atol=1e-6)
    # with a longer base list the two rectangle values rho_1, rho_2 both enter
    lim = limit_spectrum(disk_spectrum(9), 2.5, 7)
    np.testing.assert_allclose(lim, [0, 0.789568, 1, 1, 2, 2, 3], atol=1e-6)
    assert 4 * limit_rectangle_eig(1, 2.5) == pytest.approx(limit_rectangle_eig(2, 2.5))
    with pytest.raises(InvalidArgument):
        limit_spectrum([1.0, 0.0], 1.0, 2)


def test_h_star_and_window():
    assert h_star(1.0) == pytest.approx(2.2214415, rel=1e-7)
    w = admissible_window(1.0, 2.0)
    assert (w.h0, w.h1) == pytest.approx((2.167905, 4.231317), rel=1e-6)
    assert window_is_feasible(1.0, 2.0, w.h0, w.h1, margin=0.049)
    assert not window_is_feasible(1.0, 2.0, w.h0, w.h1, margin=0.051)
    with pytest.raises(InfeasibleWindow):
        admissible_window(1.0, 1.1)
    with pytest.raises(InfeasibleWindow):
        Window(2.5, 3.0, 2.2)


@settings(max_examples=60, deadline=None)
@given(s1=st.floats(0.1, 10.0), ratio=st.floats(1.16, 5.0))
def test_admissible_window_is_feasible(s1, ratio):
    w = admissible_window(s1, ratio * s1)
    assert w.h0 < w.h_star < w.h1
    assert window_is_feasible(s1, ratio * s1, w.h0, w.h1, margin=0.0499)


def test_next_distinct():
    assert next_distinct([0.0, 1.0, 1.001, 2.0]) == 2.0
    assert next_distinct([0.0, 1.0, 1.5]) == 1.5
    with pytest.raises(InfeasibleWindow):
        next_distinct([0.0, 1.0, 1.0])
