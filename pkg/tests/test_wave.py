"""Finite-difference wave solver tests.

Oracles: the second-difference Laplacian is exact on quadratics, the
undamped stepper must track the separable standing mode sin(pi x/L)
cos(c pi t/L), and a sinusoidal flux drive on a 1D half-line integrates to
the one-sided traveling wave (c A/omega)(1 - cos omega(t - x/c)).
"""

import math

import numpy as np
import pytest

from bubblewave.config import SimulationConfig, apply_overrides
from bubblewave.wave import (
    TAG_DIRICHLET,
    TAG_EXCITED,
    TAG_INTERIOR,
    TAG_NEUMANN,
    CorrectorError,
    NondegeneracyError,
    WaveStepper,
    build_grid,
    discrete_laplacian,
    excitation_rate,
    excitation_value,
    load_k_field,
    run_wave,
    step_count,
    write_probe_csv,
    write_snapshot_csv,
)


def make_cfg(**overrides):
    return apply_overrides(SimulationConfig(),
                           {k: str(v) for k, v in overrides.items()})


# --------------------------------------------------------------------------
# grids


def test_build_grid_1d_tags_and_spacing():
    grid = build_grid(make_cfg(dim=1, nx=11, Lx=2.0, boundary="neumann"))
    assert grid.counts == (11,)
    assert grid.spacing == (0.2,)
    assert grid.tags[0] == TAG_EXCITED          # left end carries the drive
    assert grid.tags[-1] == TAG_NEUMANN
    assert np.all(grid.tags[1:-1] == TAG_INTERIOR)


def test_build_grid_without_drive_keeps_wall_tag():
    grid = build_grid(make_cfg(dim=1, nx=11, boundary="dirichlet", A_p=0))
    assert grid.tags[0] == TAG_DIRICHLET
    assert grid.tags[-1] == TAG_DIRICHLET


def test_build_grid_2d_excited_strip():
    cfg = make_cfg(dim=2, nx=21, ny=21, Lx=1.0, Ly=1.0, boundary="dirichlet",
                   excite_lo=0.25, excite_hi=0.75, focus_x=-1)
    grid = build_grid(cfg)
    y = grid.axes()[1]
    span = (y >= 0.25) & (y <= 0.75)
    assert np.all(grid.tags[0, span] == TAG_EXCITED)
    assert np.all(grid.tags[0, ~span] == TAG_DIRICHLET)
    assert np.all(grid.tags[-1, :] == TAG_DIRICHLET)
    assert np.all(grid.delays == 0.0)


def test_build_grid_focus_delays():
    cfg = make_cfg(dim=2, nx=21, ny=21, Lx=1.0, Ly=1.0,
                   excite_lo=0.2, excite_hi=0.8, focus_x=0.4, focus_y=0.5)
    grid = build_grid(cfg)
    y = grid.axes()[1]
    mask = grid.tags[0] == TAG_EXCITED
    dist = np.hypot(0.4, y[mask] - 0.5)
    expected = (dist.max() - dist) / cfg.params.c
    np.testing.assert_allclose(grid.delays[0, mask], expected, rtol=1e-14)
    # the farthest emitter fires first (zero delay), the nearest last
    assert grid.delays[0, mask].min() == 0.0
    assert np.all(grid.delays[0, ~mask] == 0.0)


def test_nearest_node_and_position_round_trip():
    grid = build_grid(make_cfg(dim=2, nx=11, ny=21, Lx=1.0, Ly=2.0))
    for node in [(0, 0), (3, 7), (10, 20)]:
        pos = grid.position(node)
        assert grid.nearest_node(pos) == node
    assert grid.position((2, 5)) == (pytest.approx(0.2), pytest.approx(0.5))
    with pytest.raises(ValueError):
        grid.nearest_node((0.5,))


# --------------------------------------------------------------------------
# excitation data


def test_excitation_value_closed_form():
    grid = build_grid(make_cfg(dim=1, nx=11))
    t = 3.7e-5
    g = excitation_value(grid, 2e5, 15e3, t)
    assert g[0] == pytest.approx(2e5 * math.sin(2.0 * math.pi * 15e3 * t),
                                 rel=1e-15)
    assert np.all(g[1:] == 0.0)


def test_excitation_rate_closed_form():
    grid = build_grid(make_cfg(dim=1, nx=11))
    t = 3.7e-5
    g = excitation_rate(grid, 2e5, 15e3, t)
    omega = 2.0 * math.pi * 15e3
    assert g[0] == pytest.approx(2e5 * omega * math.cos(omega * t), rel=1e-15)


def test_excitation_respects_delays():
    cfg = make_cfg(dim=2, nx=11, ny=11, excite_lo=0.0, excite_hi=1.0,
                   focus_x=0.5, focus_y=0.5)
    grid = build_grid(cfg)
    mask = grid.tags == TAG_EXCITED
    latest = grid.delays[mask].max()
    # before the last emitter switches on, some excited nodes are still silent
    g = excitation_value(grid, 1e5, 15e3, 0.5 * latest)
    assert np.any(g[mask] == 0.0) and np.any(g[mask] != 0.0)


# --------------------------------------------------------------------------
# Laplacian


def test_laplacian_1d_exact_on_quadratics():
    grid = build_grid(make_cfg(dim=1, nx=41, Lx=2.0, A_p=0))
    x = grid.axes()[0]
    a, b, c = 1.3, -0.7, 0.4
    f = a * x**2 + b * x + c
    # outward normal derivative: -f'(0) on the left, +f'(L) on the right
    g = np.zeros_like(f)
    g[0] = -(2.0 * a * 0.0 + b)
    g[-1] = 2.0 * a * 2.0 + b
    lap = discrete_laplacian(f, grid, g)
    np.testing.assert_allclose(lap, 2.0 * a, rtol=1e-9)


def test_laplacian_2d_exact_on_quadratics():
    grid = build_grid(make_cfg(dim=2, nx=17, ny=13, Lx=1.0, Ly=1.5,
                               boundary="neumann", A_p=0))
    X, Y = np.meshgrid(*grid.axes(), indexing="ij")
    a, d = 0.8, -0.3
    f = a * X**2 + d * Y**2 + 0.2 * X - 0.1 * Y + 1.0
    g = np.zeros_like(f)
    g[0, :] = -(2.0 * a * X[0, :] + 0.2)
    g[-1, :] = 2.0 * a * X[-1, :] + 0.2
    g[:, 0] = -(2.0 * d * Y[:, 0] - 0.1)
    g[:, -1] = 2.0 * d * Y[:, -1] - 0.1
    # corners carry both normals; skip them in the check
    lap = discrete_laplacian(f, grid, g)
    np.testing.assert_allclose(lap[1:-1, 1:-1], 2.0 * a + 2.0 * d, rtol=1e-9)
    np.testing.assert_allclose(lap[1:-1, 0], 2.0 * a + 2.0 * d, rtol=1e-9)
    np.testing.assert_allclose(lap[0, 1:-1], 2.0 * a + 2.0 * d, rtol=1e-9)


def test_laplacian_zeroes_dirichlet_rows():
    grid = build_grid(make_cfg(dim=1, nx=21, boundary="dirichlet", A_p=0))
    lap = discrete_laplacian(np.random.default_rng(0).normal(size=21), grid)
    assert lap[0] == 0.0 and lap[-1] == 0.0


def test_laplacian_shape_mismatch():
    grid = build_grid(make_cfg(dim=1, nx=21))
    with pytest.raises(ValueError):
        discrete_laplacian(np.zeros(20), grid)


# --------------------------------------------------------------------------
# nonlinearity profile


def test_load_k_field_constant():
    cfg = make_cfg(dim=1, nx=11, k=3e-9)
    grid = build_grid(cfg)
    np.testing.assert_array_equal(load_k_field(cfg, grid), np.full(11, 3e-9))


def test_load_k_field_profile(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("x,k\n0.5,2e-9\n0.0,4e-9\n", encoding="utf-8")
    cfg = make_cfg(dim=1, nx=11, Lx=1.0, k=1e-9, k_profile=str(path))
    grid = build_grid(cfg)
    k = load_k_field(cfg, grid)
    assert k[5] == 2e-9
    assert k[0] == 4e-9
    assert np.all(k[1:5] == 1e-9) and np.all(k[6:] == 1e-9)


def test_load_k_field_profile_needs_columns(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("x,k\n0.5,2e-9\n", encoding="utf-8")
    cfg = make_cfg(dim=2, nx=5, ny=5, k_profile=str(path))
    with pytest.raises(ValueError):
        load_k_field(cfg, build_grid(cfg))


# --------------------------------------------------------------------------
# stepper basics


def test_dt_selection():
    cfg = make_cfg(dim=1, nx=101, Lx=1.0, cfl=0.3)
    st = WaveStepper(cfg)
    assert st.dt == pytest.approx(0.3 * 0.01 / 1500.0, rel=1e-15)
    st = WaveStepper(make_cfg(dim=1, nx=101, dt_wave=1e-6))
    assert st.dt == 1e-6


def test_step_count():
    cfg = make_cfg(T_wave=1e-3)
    assert step_count(cfg, 1e-4) == 10
    assert step_count(cfg, 3e-4) == 4
    assert step_count(cfg, 1e-3) == 1


def test_fractional_damping_boost():
    # b_eff = b tau^(alpha-1): enormous for tau << 1, equal to b at alpha = 1
    cfg = make_cfg(damping="fractional", alpha=0.5, tau=1e-12, b=1e-3)
    st = WaveStepper(cfg)
    assert st.b_eff == pytest.approx(1e-3 * (1e-12) ** (-0.5), rel=1e-14)
    assert not st.velocity_damping
    st = WaveStepper(make_cfg(damping="strong", b=1e-3))
    assert st.b_eff == 1e-3 and st.velocity_damping


def test_standing_wave_against_separated_solution():
    cfg = make_cfg(dim=1, nx=201, Lx=1.0, boundary="dirichlet", A_p=0, b=0,
                   k=0, gamma_n=0.5, beta_n=0.25, cfl=0.3)
    st = WaveStepper(cfg)
    x = st.grid.axes()[0]
    om = cfg.params.c * math.pi / cfg.Lx
    p0 = np.sin(math.pi * x / cfg.Lx)
    st.set_state(p0, np.zeros_like(p0), -om * om * p0)
    e0 = st.energy()
    for _ in range(round(2.0 * cfg.Lx / cfg.params.c / st.dt)):
        st.newmark_step()
    ref = p0 * math.cos(om * st.t)
    assert np.abs(st.p - ref).max() < 1e-5
    # undamped trapezoidal Newmark preserves the discrete energy
    assert abs(st.energy() - e0) / e0 < 1e-8


def test_superposition_at_zero_nonlinearity():
    cfg = make_cfg(dim=1, nx=81, boundary="dirichlet", A_p=0, k=0,
                   b=4.5e-6, damping="strong")
    rng = np.random.default_rng(19)
    state_a = [rng.normal(size=81) for _ in range(3)]
    state_b = [rng.normal(size=81) for _ in range(3)]

    def evolve(state):
        st = WaveStepper(cfg)
        st.set_state(*state)
        for _ in range(5):
            st.newmark_step()
        return st.p

    p_a = evolve(state_a)
    p_b = evolve(state_b)
    p_ab = evolve([a + b for a, b in zip(state_a, state_b)])
    np.testing.assert_allclose(p_ab, p_a + p_b, rtol=1e-9, atol=1e-12)


def test_fractional_at_order_one_equals_strong():
    # alpha = 1 collapses the memory kernel onto the velocity-damping branch
    base = dict(dim=1, nx=101, T_wave=2e-4, b=4.5e-6, probes="0.4")
    strong = run_wave(make_cfg(damping="strong", **base))
    frac = run_wave(make_cfg(damping="fractional", alpha=1, tau=1, **base))
    np.testing.assert_array_equal(strong.probes[0].series.values,
                                  frac.probes[0].series.values)


def test_flux_drive_builds_one_sided_wave():
    # p(x, t) -> (c A/omega)(1 - cos omega(t - x/c)) before reflections: a
    # nonnegative waveform with peak 2 c A/omega
    cfg = make_cfg(dim=1, nx=201, Lx=1.0, boundary="neumann", A_p=1e5,
                   f_p=15e3, b=4.5e-6, T_wave=8e-4, probes="0.3")
    res = run_wave(cfg)
    vals = res.probes[0].series.values
    peak_pred = 2.0 * cfg.params.c * cfg.A_p / (2.0 * math.pi * cfg.f_p)
    assert vals[0] == 0.0
    assert vals.max() == pytest.approx(peak_pred, rel=0.15)
    assert vals.min() >= -0.02 * peak_pred
    assert vals.mean() > 0.25 * vals.max()


# --------------------------------------------------------------------------
# failure modes


def test_nondegeneracy_error_names_node_and_time():
    # flux drive pressure scale is c A_p/omega ~ 1.6 kPa; k = -2e-4 pushes
    # 1 + 2 k p through the 0.1 floor near the first crest
    cfg = make_cfg(dim=1, nx=51, Lx=1.0, boundary="neumann", A_p=1e5,
                   f_p=15e3, k="-2e-4", T_wave=2e-4)
    with pytest.raises(NondegeneracyError) as err:
        run_wave(cfg)
    exc = err.value
    assert len(exc.node) == 1
    assert 0.0 < exc.time <= 2e-4
    assert exc.value < cfg.gamma_floor
    assert "node" in str(exc) and "1 + 2 k p" in str(exc)


def test_corrector_budget_error():
    cfg = make_cfg(dim=1, nx=51, newmark_max_iters=1, newmark_tol=1e-14,
                   T_wave=1e-4)
    with pytest.raises(CorrectorError, match="did not reach"):
        run_wave(cfg)


# --------------------------------------------------------------------------
# recording


def test_probes_and_snapshots():
    cfg = make_cfg(dim=1, nx=101, T_wave=1e-4, probes="0.25;0.5",
                   n_snapshots=3)
    res = run_wave(cfg)
    assert len(res.probes) == 2
    assert res.probes[0].location[0] == pytest.approx(0.25, abs=0.01)
    assert res.probes[1].location[0] == pytest.approx(0.5, abs=0.01)
    for probe in res.probes:
        assert probe.series.values.size == res.n_steps + 1
        assert probe.series.dt == res.dt
    assert len(res.snapshots) == 3
    assert res.snapshot_times[0] == 0.0
    assert res.snapshot_times[-1] == pytest.approx(res.n_steps * res.dt,
                                                   rel=1e-12)
    for snap in res.snapshots:
        assert snap.shape == res.grid.counts
    assert res.gamma_min <= 1.0 + 1e-12
    assert res.corrector_iters_max >= 1


def test_run_wave_with_body_source():
    # a spatially uniform source on a Neumann box with no drive keeps the
    # field flat, so Delta p vanishes and p_tt = S exactly; the scheme then
    # reproduces its own discrete quadrature of p_tt = S in closed form:
    #   p_n = S dt^2 ((n-1)^2/2 + gamma (n-1) + beta),  n >= 1
    cfg = make_cfg(dim=1, nx=41, A_p=0, boundary="neumann", T_wave=1e-4,
                   probes="0.5")
    amp = 1e7

    def source(t):
        return np.full(41, amp)

    res = run_wave(cfg, source_fn=source)
    vals = res.probes[0].series.values
    n = np.arange(vals.size, dtype=float)
    discrete = amp * res.dt**2 * (0.5 * (n - 1.0) ** 2
                                  + cfg.gamma_n * (n - 1.0) + cfg.beta_n)
    np.testing.assert_allclose(vals[1:], discrete[1:], rtol=1e-9)
    # and the continuum limit amp t^2/2 is approached at late times
    t_end = vals.size - 1
    assert vals[-1] / (0.5 * amp * (t_end * res.dt) ** 2) == \
        pytest.approx(1.0, abs=0.05)


def test_csv_writers(tmp_path):
    cfg = make_cfg(dim=1, nx=41, T_wave=5e-5, probes="0.5", n_snapshots=2)
    res = run_wave(cfg)
    probe_path = tmp_path / "probe.csv"
    write_probe_csv(probe_path, res.probes[0])
    head = probe_path.read_text(encoding="utf-8").splitlines()
    assert head[0] == "t,p"
    assert len(head) == res.n_steps + 2
    snap_path = tmp_path / "snap.csv"
    write_snapshot_csv(snap_path, res.grid, res.snapshots[0])
    lines = snap_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,p"
    assert len(lines) == 42


def test_snapshot_csv_2d(tmp_path):
    cfg = make_cfg(dim=2, nx=5, ny=4, A_p=0)
    grid = build_grid(cfg)
    path = tmp_path / "snap2.csv"
    write_snapshot_csv(path, grid, np.zeros((5, 4)))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,y,p"
    assert len(lines) == 21


def test_set_state_resets_fractional_history():
    cfg = make_cfg(dim=1, nx=31, damping="fractional", alpha=0.5, T_wave=1e-4)
    st = WaveStepper(cfg)
    for _ in range(4):
        st.newmark_step()
    assert len(st.history) == 5
    st.set_state(np.zeros(31), np.zeros(31), np.zeros(31))
    assert len(st.history) == 1


def test_fractional_run_is_more_damped_than_strong():
    # with tau = 1e-12 and alpha = 0.5 the effective damping is boosted by
    # tau^(alpha-1) = 1e6, so the received amplitude must drop
    base = dict(dim=1, nx=101, T_wave=4e-4, b=1e-3, A_p=1e5, f_p=15e3,
                probes="0.4")
    strong = run_wave(make_cfg(damping="strong", **base))
    frac = run_wave(make_cfg(damping="fractional", alpha=0.5, tau=1e-12, **base))
    amp_strong = np.abs(strong.probes[0].series.values).max()
    amp_frac = np.abs(frac.probes[0].series.values).max()
    assert np.all(np.isfinite(frac.probes[0].series.values))
    assert amp_frac < amp_strong
