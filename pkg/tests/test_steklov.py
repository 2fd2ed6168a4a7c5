from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steklov_lab.analytic import rectangle_spectrum
from steklov_lab.assembly import assemble_stiffness
from steklov_lab.errors import InvalidArgument
from steklov_lab.mesh import make_rectangle_mesh, rectangle_submesh, scale
from steklov_lab.steklov import (
    Condition,
    SteklovProblem,
    boundary_mass_split,
    dirichlet_energy,
    glued_regions,
    harmonic_extension,
    solve_mixed_bvp,
    solve_steklov,
)

I_SIDES = {"I_bottom": "dirichlet", "I_top": "dirichlet"}


def test_coarse_disk_spectrum(small_disk):
    s = solve_steklov(SteklovProblem(small_disk, count=5))
    assert abs(s.values[0]) < 1e-10
    np.testing.assert_allclose(s.values[1:], [1, 1, 2, 2], rtol=2e-2)
    assert s.multiplets[0] == (0,)
    assert s.residuals.max() < 1e-8
    np.testing.assert_allclose(s.vectors.T @ s.B @ s.vectors, np.eye(5), atol=1e-10)
    # the constant mode carries no energy; its extension is constant
    np.testing.assert_allclose(s.fields[:, 0], s.fields[0, 0], rtol=1e-8)


def test_problem_validation(small_disk, rect):
    with pytest.raises(InvalidArgument, match="unknown label"):
        SteklovProblem(small_disk, {"nope": "dirichlet"})
    with pytest.raises(InvalidArgument, match="no Spectral"):
        SteklovProblem(small_disk, {"outer": "neumann"})
    with pytest.raises(InvalidArgument, match="unknown boundary condition"):
        SteklovProblem(rect, {"I_top": "robin"})
    p = SteklovProblem(rect, I_SIDES)
    assert p.conditions["free_left"] is Condition.SPECTRAL
    part = p.partition()
    part.check_covers(rect.n_vertices)
    # corner vertices touch a Dirichlet edge, so they are Dirichlet
    assert set(rect.vertex_sets["I_bottom"]) <= set(part.D)


def test_rectangle_dirichlet_matches_closed_form():
    m = make_rectangle_mesh(0.2, 1.0, 4, 80)
    s = solve_steklov(SteklovProblem(m, I_SIDES, count=2))
    np.testing.assert_allclose(s.values, rectangle_spectrum(0.2, 1.0, "dirichlet", 2), rtol=2e-2)


def test_rectangle_neumann_matches_closed_form():
    m = make_rectangle_mesh(0.2, 1.0, 4, 80)
    s = solve_steklov(SteklovProblem(m, {k: "neumann" for k in I_SIDES}, count=3))
    ref = rectangle_spectrum(0.2, 1.0, "neumann", 3)
    assert abs(s.values[0]) < 1e-9
    np.testing.assert_allclose(s.values[1:], ref[1:], rtol=2e-2)


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_scaling_law(glued_configs, t):
    g = glued_configs[0]
    a = solve_steklov(SteklovProblem(g, count=5))
    b = solve_steklov(SteklovProblem(scale(g, t), count=5))
    np.testing.assert_allclose(b.values[1:], a.values[1:] / t, rtol=1e-8)
    L = g.boundary_length()
    assert b.values[1] * t * L == pytest.approx(a.values[1] * L, rel=1e-8)
    fa = boundary_mass_split(a, glued_regions(g))
    fb = boundary_mass_split(b, glued_regions(g))
    for k in fa:
        np.testing.assert_allclose(fb[k], fa[k], atol=1e-8)


@settings(max_examples=10, deadline=None)
@given(t=st.floats(0.2, 5.0))
def test_scaling_law_random_factor(small_disk, t):
    a = solve_steklov(SteklovProblem(small_disk, count=4)).values
    b = solve_steklov(SteklovProblem(scale(small_disk, t), count=4)).values
    np.testing.assert_allclose(b[1:], a[1:] / t, rtol=1e-8)


def test_uniform_weight_divides_values(small_disk):
    a = solve_steklov(SteklovProblem(small_disk, count=4)).values
    b = solve_steklov(SteklovProblem(small_disk, weight=4.0, count=4)).values
    np.testing.assert_allclose(b[1:], a[1:] / 4, rtol=1e-10)


def test_mass_fractions_sum_to_one(glued_configs):
    g = glued_configs[1]
    s = solve_steklov(SteklovProblem(g, count=6))
    split = boundary_mass_split(s, glued_regions(g))
    np.testing.assert_allclose(split["base"] + split["rect"], 1.0, rtol=1e-12)
    assert np.all((split["base"] >= 0) & (split["base"] <= 1))
    with pytest.raises(InvalidArgument, match="miss"):
        boundary_mass_split(s, {"base": ["outer"]})


@pytest.mark.parametrize(
    "which,I",
    [(0, ("free_left", "free_right")), (1, ("free_left", "free_right")), ("base", ("arc1", "arc2"))],
)
def test_dirichlet_neumann_bracketing(coarse_family, glued_configs, which, I):
    """Min-max on one mesh: sigma_j(full) <= sigma_j^N(I) <= sigma_j^D(I)."""
    m = coarse_family.base if which == "base" else glued_configs[which]
    full = solve_steklov(SteklovProblem(m, count=6)).values
    neu = solve_steklov(SteklovProblem(m, {lab: "neumann" for lab in I}, count=6)).values
    dir_ = solve_steklov(SteklovProblem(m, {lab: "dirichlet" for lab in I}, count=6)).values
    tol = 1e-9
    assert np.all(full <= neu + tol)
    assert np.all(neu <= dir_ + tol)


def test_harmonic_extension_reproduces_linear(small_disk):
    x = small_disk.coords[:, 0] + 2 * small_disk.coords[:, 1]
    u = harmonic_extension(small_disk, x)
    np.testing.assert_allclose(u, x, atol=1e-10)


def test_mixed_bvp_constant_data(glued_configs):
    g = glued_configs[0]
    n = len(g.vertex_sets["I_eps"])
    sol = solve_mixed_bvp(g, np.full(n, 3.0))
    np.testing.assert_allclose(sol.field, 3.0, rtol=1e-10)
    with pytest.raises(InvalidArgument):
        solve_mixed_bvp(g, np.ones(n + 1))
    with pytest.raises(InvalidArgument, match="region"):
        solve_mixed_bvp(g, np.ones(n), region="nope")


def test_mixed_bvp_maximum_on_seam(glued_configs):
    """Discrete maximum principle over 50 seeded random data vectors."""
    rng = np.random.default_rng(2024)
    for k in range(50):
        g = glued_configs[k % 3]
        n = len(g.vertex_sets["I_eps"])
        sol = solve_mixed_bvp(g, rng.standard_normal(n))
        assert sol.max_on_seam
        assert np.abs(sol.field).max() <= np.abs(sol.field[sol.seam]).max() * (1 + 1e-12)


@pytest.mark.parametrize("config", range(3))
def test_energy_claim(glued_configs, config):
    """E_R(u - v) <= E_R(u) for v the mixed solution with the seam trace of u."""
    g = glued_configs[config]
    s = solve_steklov(SteklovProblem(g, count=5))
    sub, gids, _ = rectangle_submesh(g)
    K = assemble_stiffness(sub)
    for j in range(5):
        u = s.fields[:, j]
        v = solve_mixed_bvp(g, u).field
        ur = u[gids]
        e_u = dirichlet_energy(K, ur)
        e_diff = dirichlet_energy(K, ur - v)
        assert e_diff <= e_u * (1 + 1e-10) + 1e-14
        # Pythagoras: v is the energy minimizer for its seam data
        assert e_diff + dirichlet_energy(K, v) == pytest.approx(e_u, rel=1e-8, abs=1e-12)


def test_spectrum_report_and_determinism(small_disk):
    a = solve_steklov(SteklovProblem(small_disk, count=4))
    b = solve_steklov(SteklovProblem(small_disk, count=4))
    assert a.report() == b.report()
    np.testing.assert_array_equal(a.vectors, b.vectors)
    assert set(a.report()) >= {"eigenvalues", "residuals", "region_masses", "mesh_hash"}


def test_lumped_mass_close_to_consistent(small_disk):
    a = solve_steklov(SteklovProblem(small_disk, count=4)).values
    b = solve_steklov(SteklovProblem(small_disk, count=4, lumped=True)).values
    np.testing.assert_allclose(a[1:], b[1:], rtol=2e-2)
