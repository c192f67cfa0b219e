import numpy as np
import pytest

from diffuselab.diffuse import solve_diffuse
from diffuselab.grid import Grid, GridField, norm_l2
from diffuselab.sharp_ref import (
    solve_sharp_1d_closed,
    solve_sharp_1d_fem,
    solve_sharp_2d_cutfem,
)
from conftest import const_exact_1d, const_exact_2d, spec_1d, spec_2d


class TestClosed1D:
    def test_constant_exactness(self):
        ref = solve_sharp_1d_closed(const_exact_1d())
        x = np.linspace(-1, 1, 101)
        assert np.abs(ref.value(x) - 1.0).max() <= 1e-12

    def test_robin_constant_exactness(self):
        ref = solve_sharp_1d_closed(const_exact_1d(kappa=1.0))
        x = np.linspace(-1, 1, 101)
        assert np.abs(ref.value(x) - 1.0).max() <= 1e-12

    def test_outer_neumann(self):
        ref = solve_sharp_1d_closed(spec_1d())
        assert abs(ref.derivative(np.array([-1.0]))[0]) <= 1e-10
        assert abs(ref.derivative(np.array([1.0]))[0]) <= 1e-10

    def test_continuity_at_interfaces(self):
        ref = solve_sharp_1d_closed(spec_1d())
        for xi in (-0.5, 0.5):
            left = ref.value(np.array([xi - 1e-9]))[0]
            right = ref.value(np.array([xi + 1e-9]))[0]
            assert left == pytest.approx(right, abs=1e-7)

    def test_flux_jump_condition(self):
        # - d/dx (u_in - alpha * u_out) * n_in = kappa*u + g at each interface
        spec = spec_1d(kappa=1.0, g="0.1")
        ref = solve_sharp_1d_closed(spec)
        d = 1e-7
        for xi, n_in in ((-0.5, -1.0), (0.5, 1.0)):
            du_in = ref.derivative(np.array([xi - n_in * d]))[0]
            du_out = ref.derivative(np.array([xi + n_in * d]))[0]
            u_if = ref.value(np.array([xi]))[0]
            jump = -(du_in - spec.alpha * du_out) * n_in
            assert jump == pytest.approx(1.0 * u_if + 0.1, abs=1e-5)

    def test_cross_check_fem(self):
        spec = spec_1d()
        closed = solve_sharp_1d_closed(spec)
        fem = solve_sharp_1d_fem(spec, 16384)
        x = np.linspace(-1, 1, 2001)
        assert np.abs(closed.value(x) - fem.value(x)).max() <= 1e-6

    def test_energy_agreement(self):
        spec = spec_1d()
        closed = solve_sharp_1d_closed(spec)
        fem = solve_sharp_1d_fem(spec, 16384)
        assert closed.energy == pytest.approx(fem.energy, abs=1e-8)


class TestFittedFem1D:
    def test_constant_exactness(self):
        ref = solve_sharp_1d_fem(const_exact_1d(), 128)
        x = np.linspace(-1, 1, 101)
        assert np.abs(ref.value(x) - 1.0).max() <= 1e-12

    def test_constant_exactness_fine_grid_roundoff(self):
        # elimination roundoff grows with the stiffness condition (~N^2)
        # but stays far below the discretization errors the oracle serves
        ref = solve_sharp_1d_fem(const_exact_1d(), 16384)
        x = np.linspace(-1, 1, 101)
        assert np.abs(ref.value(x) - 1.0).max() <= 1e-7

    def test_agreement_with_closed_constant_data(self):
        spec = spec_1d(q="2", h="0.5", g="0.1")
        closed = solve_sharp_1d_closed(spec)
        fem = solve_sharp_1d_fem(spec, 4096)
        x = np.linspace(-1, 1, 501)
        assert np.abs(closed.value(x) - fem.value(x)).max() <= 1e-6

    def test_symmetric_data_gives_even_solution(self):
        spec = spec_1d(q="1", h="0", g="0.1")
        fem = solve_sharp_1d_fem(spec, 2048)
        x = np.linspace(0, 1, 301)
        assert np.abs(fem.value(x) - fem.value(-x)).max() <= 1e-10

    def test_nonconstant_data(self):
        # smooth variable data: FEM self-convergence under mesh refinement
        spec = spec_1d(q="cos(x)", h="x^2", g="0.1")
        coarse = solve_sharp_1d_fem(spec, 1024)
        fine = solve_sharp_1d_fem(spec, 8192)
        x = np.linspace(-1, 1, 501)
        assert np.abs(coarse.value(x) - fine.value(x)).max() <= 1e-5

    def test_robin_term_active(self):
        base = solve_sharp_1d_fem(spec_1d(kappa=0.0, g="0"), 2048)
        robin = solve_sharp_1d_fem(spec_1d(kappa=1.0, g="0"), 2048)
        x = np.linspace(-1, 1, 101)
        assert np.abs(base.value(x) - robin.value(x)).max() > 1e-3


class TestCutFem2D:
    def test_constant_exactness(self):
        ref = solve_sharp_2d_cutfem(const_exact_2d(), 64)
        pts = np.stack(np.meshgrid(np.linspace(-1, 1, 21), np.linspace(-1, 1, 21),
                                   indexing="ij"), axis=-1)
        assert np.abs(ref.value(pts) - 1.0).max() <= 1e-9

    def test_kappa_refused(self):
        import diffuselab.fields as fields

        with pytest.raises(Exception):
            spec = spec_2d()
            object.__setattr__(spec, "kappa", 1.0)
            solve_sharp_2d_cutfem(spec, 32)

    def test_self_convergence(self):
        spec = spec_2d()
        coarse = solve_sharp_2d_cutfem(spec, 64)
        fine = solve_sharp_2d_cutfem(spec, 128)
        finest = solve_sharp_2d_cutfem(spec, 256)
        grid = Grid(spec.cuboid, (64, 64))
        pts = grid.points()
        d1 = norm_l2(GridField(grid, coarse.value(pts) - fine.value(pts)))
        d2 = norm_l2(GridField(grid, fine.value(pts) - finest.value(pts)))
        assert d2 <= d1 / 2.0

    def test_pure_volume_matches_diffuse_at_tiny_eps(self):
        # alpha = 1, beta = gamma removes the interface entirely except for g
        spec = spec_2d(alpha=1.0, beta=1.0, gamma=1.0, q="1", h="1", g="0")
        ref = solve_sharp_2d_cutfem(spec, 128)
        grid = Grid(spec.cuboid, (128, 128))
        sol = solve_diffuse(spec, grid, 0.1)
        diff = GridField(grid, sol.u.values - ref.value(grid.points()))
        assert norm_l2(diff) <= 2e-2
