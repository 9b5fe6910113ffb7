"""The four continuum steppers and their structural properties."""

import numpy as np
import pytest

from conftest import random_divfree
from geovar.errors import ConstraintViolated
from geovar.grid import CellField, GridSpec, StaggeredVectorField, VertexField, divergence_cell, from_stream_function
from geovar.models import (
    FluidState,
    MhdState,
    MicrostretchState,
    NematicState,
    fluid_step,
    mhd_step,
    microstretch_step,
    nematic_step,
)
from geovar.timestepper import SolverConfig

CFG = SolverConfig()
TIGHT = SolverConfig(residual_tol=1e-13, picard_max=800)


def fluid_state(grid, rng, scale=0.3):
    return FluidState(vel=random_divfree(grid, rng, scale), p=CellField.zeros(grid))


# ---------------------------------------------------------------------------
# Fluid
# ---------------------------------------------------------------------------


def test_fluid_uniform_translation_steady():
    g = GridSpec(6, 6, 0.5, "periodic")
    w = StaggeredVectorField(g, np.full(g.u_shape, 1.1), np.full(g.v_shape, -0.6))
    s = FluidState(vel=w, p=CellField.zeros(g))
    s1, _ = fluid_step(s, 0.25, CFG)
    assert np.abs(s1.vel.u - w.u).max() <= 1e-12
    assert np.abs(s1.vel.v - w.v).max() <= 1e-12


def test_fluid_taylor_green_energy_bounded():
    from geovar.diagnostics import energy

    n = 16
    g = GridSpec(n, n, 2 * np.pi / n, "periodic")
    xg, yg = np.meshgrid(g.eps * np.arange(n), g.eps * np.arange(n), indexing="ij")
    s = FluidState(vel=from_stream_function(VertexField(g, np.sin(xg) * np.sin(yg))), p=CellField.zeros(g))
    h = 0.5 * g.eps  # CFL ~ 0.5 at unit velocity
    e0 = energy(s)
    drift = 0.0
    for _ in range(200):
        s, _ = fluid_step(s, h, CFG)
        drift = max(drift, abs(energy(s) - e0))
    assert drift / e0 <= 1e-3


def test_fluid_matches_dense_matrix_form(rng):
    from geovar.matrix_backend import dense_fluid_step

    g = GridSpec(5, 5, 0.25, "periodic")
    s = fluid_state(g, rng, 0.2)
    h = 0.05
    s1, _ = fluid_step(s, h, TIGHT)
    wd, _ = dense_fluid_step(s.vel, h, TIGHT)
    assert np.abs(s1.vel.u - wd.u).max() <= 1e-9
    assert np.abs(s1.vel.v - wd.v).max() <= 1e-9


def test_fluid_time_reversal():
    g = GridSpec(6, 6, 0.5, "periodic")
    rng = np.random.default_rng(4)
    s0 = fluid_state(g, rng, 0.3)
    h = 0.1
    s1, _ = fluid_step(s0, h, TIGHT)
    s2, _ = fluid_step(s1, -h, TIGHT)
    assert np.abs(s2.vel.u - s0.vel.u).max() <= 10 * TIGHT.residual_tol * 10
    assert np.abs(s2.vel.v - s0.vel.v).max() <= 10 * TIGHT.residual_tol * 10


def test_state_divergence_validation(rng):
    g = GridSpec(6, 6, 0.5, "periodic")
    bad = StaggeredVectorField(g, rng.standard_normal(g.u_shape), rng.standard_normal(g.v_shape))
    with pytest.raises(ConstraintViolated):
        FluidState(vel=bad, p=CellField.zeros(g))


# ---------------------------------------------------------------------------
# MHD
# ---------------------------------------------------------------------------


def test_mhd_reduces_to_fluid_without_field(rng):
    g = GridSpec(6, 6, 0.5, "periodic")
    w = random_divfree(g, rng, 0.3)
    h = 0.1
    sf, _ = fluid_step(FluidState(vel=w, p=CellField.zeros(g)), h, CFG)
    sm, _ = mhd_step(MhdState(vel=w, p=CellField.zeros(g), b=StaggeredVectorField.zeros(g)), h, CFG)
    assert np.abs(sf.vel.u - sm.vel.u).max() <= 1e-12
    assert np.abs(sm.b.u).max() == 0.0


def test_mhd_force_free_uniform_field_stationary():
    g = GridSpec(6, 6, 0.5, "periodic")
    b = StaggeredVectorField(g, np.full(g.u_shape, 0.7), np.full(g.v_shape, -0.2))
    s = MhdState(vel=StaggeredVectorField.zeros(g), p=CellField.zeros(g), b=b)
    s1, _ = mhd_step(s, 0.25, CFG)
    assert np.abs(s1.vel.u).max() <= 1e-12
    assert np.abs(s1.b.u - b.u).max() <= 1e-12


def test_mhd_cross_helicity_single_step():
    from geovar.diagnostics import cross_helicity
    from geovar.presets import build_initial_state, load_preset

    c = load_preset("mhd-vortex")
    s = build_initial_state(c)
    j0 = cross_helicity(s, c.h)
    s1, _ = mhd_step(s, c.h, c.solver)
    assert abs(cross_helicity(s1, c.h) - j0) <= 10 * c.solver.residual_tol * max(1.0, abs(j0))


def test_mhd_matches_dense_matrix_form(rng):
    from geovar.matrix_backend import dense_mhd_step

    g = GridSpec(5, 5, 0.25, "periodic")
    w = random_divfree(g, rng, 0.2)
    b = random_divfree(g, rng, 0.2)
    h = 0.05
    s1, _ = mhd_step(MhdState(vel=w, p=CellField.zeros(g), b=b), h, TIGHT)
    wd, bd, _ = dense_mhd_step(w, b, h, TIGHT)
    assert np.abs(s1.vel.u - wd.u).max() <= 1e-9
    assert np.abs(s1.b.u - bd.u).max() <= 1e-9


def test_mhd_divergences_preserved(rng):
    g = GridSpec(7, 6, 0.3, "no-normal-flow")
    w = random_divfree(g, rng, 0.2)
    b = random_divfree(g, rng, 0.2)
    s = MhdState(vel=w, p=CellField.zeros(g), b=b)
    for _ in range(5):
        s, _ = mhd_step(s, 0.1, CFG)
    assert np.abs(divergence_cell(s.vel).values).max() <= 1e-10
    assert np.abs(divergence_cell(s.b).values).max() <= 1e-12


# ---------------------------------------------------------------------------
# Nematic
# ---------------------------------------------------------------------------


def _nematic_state(grid, rng, omega=None, alpha=None, vel=None):
    return NematicState(
        vel=vel if vel is not None else StaggeredVectorField.zeros(grid),
        p=CellField.zeros(grid),
        omega=omega if omega is not None else CellField.zeros(grid),
        alpha=alpha if alpha is not None else CellField.zeros(grid),
    )


def test_nematic_constant_director_stationary():
    g = GridSpec(6, 6, 0.5, "no-normal-flow")
    s = _nematic_state(g, None, alpha=CellField(g, np.full(g.cell_shape, 0.4)))
    s1, _ = nematic_step(s, 0.3, CFG)
    assert np.abs(s1.vel.u).max() <= 1e-12
    assert np.abs(s1.omega.values).max() <= 1e-12
    assert np.abs(s1.alpha.values - 0.4).max() <= 1e-12


def test_nematic_zero_velocity_director_update_exact(rng):
    # with zero velocity the Cayley transports are the identity, so
    # alpha_k = alpha + h omega exactly
    g = GridSpec(6, 6, 1.0, "periodic")
    omega = CellField(g, rng.standard_normal(g.cell_shape))
    alpha = CellField(g, np.full(g.cell_shape, 0.1))  # uniform: Lap = 0, no force
    s = _nematic_state(g, rng, omega=omega, alpha=alpha)
    h = 0.2
    s1, _ = nematic_step(s, h, CFG)
    np.testing.assert_allclose(s1.alpha.values, alpha.values + h * omega.values, atol=1e-12)


def test_nematic_micro_momentum_conserved():
    from geovar.diagnostics import micro_momentum
    from geovar.presets import build_initial_state, load_preset

    c = load_preset("nematic-disk")
    s = build_initial_state(c)
    m0 = micro_momentum(s)
    for _ in range(20):
        s, _ = nematic_step(s, c.h, c.solver)
        assert abs(micro_momentum(s) - m0) <= 1e-10 * max(1.0, abs(m0))


# ---------------------------------------------------------------------------
# Microstretch
# ---------------------------------------------------------------------------


def _micro_state(grid, **fields):
    zero = CellField.zeros(grid)
    defaults = dict(
        vel=StaggeredVectorField.zeros(grid), p=zero, omega=zero, stretch=zero,
        alpha=zero, lam=zero, j_r=zero, j_s=zero,
    )
    defaults.update(fields)
    return MicrostretchState(**defaults)


def test_microstretch_stretch_sector_inert_when_disabled(rng):
    g = GridSpec(6, 6, 1.0, "no-normal-flow")
    omega = CellField(g, np.where(rng.standard_normal(g.cell_shape) > 0, 1.0, 0.0))
    s = _micro_state(g, omega=omega)
    s1, _ = microstretch_step(s, 0.3, CFG, stretch_enabled=False)
    assert np.abs(s1.stretch.values).max() == 0.0
    assert np.abs(s1.q_momentum.values).max() == 0.0
    assert np.abs(s1.i_s.values).max() == 0.0
    assert np.abs(s1.lam.values).max() == 0.0


def test_microstretch_uniform_rotation_invariants():
    # uniform omega, zero velocity, zero alpha gradients: pi and j_r constant
    g = GridSpec(6, 6, 1.0, "periodic")
    omega = CellField(g, np.full(g.cell_shape, 0.8))
    s = _micro_state(g, omega=omega)
    s1, _ = microstretch_step(s, 0.3, CFG)
    np.testing.assert_allclose(s1.pi.values, s.pi.values, atol=1e-12)
    np.testing.assert_allclose(s1.j_r.values, s.j_r.values, atol=1e-12)


def test_microstretch_micro_momentum_conserved():
    from geovar.diagnostics import micro_momentum
    from geovar.presets import build_initial_state, load_preset

    c = load_preset("microstretch-disk")
    s = build_initial_state(c)
    m0 = micro_momentum(s)
    for _ in range(20):
        s, _ = microstretch_step(s, c.h, c.solver)
        assert abs(micro_momentum(s) - m0) <= 1e-10 * max(1.0, abs(m0))


def test_microstretch_derived_fields_recomputed(rng):
    g = GridSpec(6, 6, 1.0, "periodic")
    omega = CellField(g, rng.standard_normal(g.cell_shape))
    j_r = CellField(g, 0.3 * rng.standard_normal(g.cell_shape))
    s = _micro_state(g, omega=omega, j_r=j_r)
    np.testing.assert_allclose(s.pi.values, np.exp(j_r.values) * omega.values)
    np.testing.assert_allclose(s.i_r.values, 0.5 * np.exp(j_r.values) * omega.values**2)


def test_step_bookkeeping(rng):
    g = GridSpec(6, 6, 0.5, "periodic")
    s = fluid_state(g, rng, 0.2)
    s1, stats = fluid_step(s, 0.1, CFG)
    assert s1.k == 1 and abs(s1.t - 0.1) < 1e-15
    assert stats.picard_iters >= 1 and np.isfinite(stats.residual)


# ---------------------------------------------------------------------------
# Dense matrix-form equivalence for the complex-fluid steppers (5x5)
# ---------------------------------------------------------------------------


def _dense_graph_laplacian(grid):
    from geovar.matrix_backend import mesh_index

    mesh = mesh_index(grid)
    lap = np.zeros((mesh.n, mesh.n))
    for c in range(mesh.n):
        for nb in mesh.neighbors(c):
            lap[c, nb] += 1.0
            lap[c, c] -= 1.0
    return lap / grid.eps**2


def _dense_skew_force(f_vals, e_vals, grid):
    from geovar.matrix_backend import edge_field_of_one_form

    skew = 0.5 * (np.outer(f_vals, e_vals) - np.outer(e_vals, f_vals))
    return edge_field_of_one_form(skew, grid)


def test_nematic_matches_dense_matrix_form(rng):
    from geovar.lie_core import _cayley_raw
    from geovar.matrix_backend import dense_fluid_step, to_flux_matrix

    g = GridSpec(5, 5, 0.25, "periodic")
    w0 = random_divfree(g, rng, 0.2)
    omega0 = rng.standard_normal(g.cell_shape)
    alpha0 = 0.5 * rng.standard_normal(g.cell_shape)
    s = NematicState(
        vel=w0, p=CellField.zeros(g), omega=CellField(g, omega0), alpha=CellField(g, alpha0)
    )
    h = 0.05
    s1, _ = nematic_step(s, h, TIGHT)

    # dense route: explicit cay matrices, graph Laplacian, skew forcing
    y = to_flux_matrix(w0).entries
    q_h = _cayley_raw(h * y)
    q_h2 = _cayley_raw(0.5 * h * y)
    alpha_d = q_h @ alpha0.ravel() + h * (q_h2 @ omega0.ravel())
    lap_d = _dense_graph_laplacian(g) @ alpha_d
    force = _dense_skew_force(lap_d, alpha_d, g)
    w1_d, _ = dense_fluid_step(w0, h, TIGHT, forcing=force)
    y1 = to_flux_matrix(w1_d).entries
    omega_d = _cayley_raw(0.5 * h * y1) @ (q_h2 @ omega0.ravel() + h * lap_d)

    assert np.abs(s1.vel.u - w1_d.u).max() <= 1e-9
    assert np.abs(s1.alpha.values.ravel() - alpha_d).max() <= 1e-9
    assert np.abs(s1.omega.values.ravel() - omega_d).max() <= 1e-9


def test_microstretch_matches_dense_matrix_form(rng):
    from geovar.lie_core import _cayley_raw
    from geovar.matrix_backend import dense_fluid_step, to_flux_matrix

    g = GridSpec(5, 5, 0.25, "periodic")
    w0 = random_divfree(g, rng, 0.2)
    fields = {
        name: 0.3 * rng.standard_normal(g.cell_shape)
        for name in ("omega", "stretch", "alpha", "lam", "j_r", "j_s")
    }
    s = MicrostretchState(
        vel=w0, p=CellField.zeros(g), **{k: CellField(g, v) for k, v in fields.items()}
    )
    h = 0.05
    s1, _ = microstretch_step(s, h, TIGHT)

    y = to_flux_matrix(w0).entries
    q_h = _cayley_raw(h * y)
    cay = lambda vec: q_h @ vec
    omega0, stretch0 = fields["omega"].ravel(), fields["stretch"].ravel()
    alpha0, lam0 = fields["alpha"].ravel(), fields["lam"].ravel()
    jr0, js0 = fields["j_r"].ravel(), fields["j_s"].ravel()
    alpha_d = cay(alpha0 + h * omega0)
    lap_d = _dense_graph_laplacian(g) @ alpha_d
    pi_d = cay(np.exp(jr0) * omega0) + h * lap_d
    lam_d = cay(lam0 + h * stretch0)
    jr_d = cay(jr0 - 2 * h * stretch0)
    js_d = cay(js0 - 2 * h * stretch0)
    omega_d = np.exp(-jr_d) * pi_d
    ir_d = 0.5 * np.exp(-jr_d) * pi_d**2
    c = cay(np.exp(js0) * stretch0) - 2 * h * ir_d - h * lam_d
    a = h * np.exp(-js_d)
    q_d = 2 * c / (1.0 + np.sqrt(1.0 + 4 * a * c))
    stretch_d = np.exp(-js_d) * q_d
    is_d = 0.5 * np.exp(-js_d) * q_d**2
    force = (
        _dense_skew_force(pi_d, omega_d, g)
        + _dense_skew_force(q_d, stretch_d, g)
        + _dense_skew_force(ir_d, jr_d, g)
        + _dense_skew_force(is_d, js_d, g)
        + _dense_skew_force(lap_d, alpha_d, g)
    )
    w1_d, _ = dense_fluid_step(w0, h, TIGHT, forcing=force)

    assert np.abs(s1.vel.u - w1_d.u).max() <= 1e-9
    assert np.abs(s1.alpha.values.ravel() - alpha_d).max() <= 1e-9
    assert np.abs(s1.omega.values.ravel() - omega_d).max() <= 1e-9
    assert np.abs(s1.stretch.values.ravel() - stretch_d).max() <= 1e-9
    assert np.abs(s1.lam.values.ravel() - lam_d).max() <= 1e-9
