"""Finite-difference solver for the nonlinear damped acoustic wave equation

    ((1 + 2 k p) p_t)_t - c^2 Lap(p) - damping + 2 k (p_t)^2 = source

on a 1D interval or 2D rectangle with second-order central differences.
Damping is either strong (b * Lap(p_t)) or time-fractional
(b tau^(alpha-1) * Lap(D_t^alpha p), Caputo derivative via the L1 scheme).
Time stepping is a Newmark predictor-corrector; the corrector fixed-point
iterates the nonlinear mass factor, the Laplacian, and the damping term
until the acceleration update stalls below ``newmark_tol``.

Boundary handling: Dirichlet nodes hold p = 0 and their Laplacian rows are
zero; Neumann boundaries enter through ghost nodes with prescribed outward
normal derivative. The excited part of the left edge radiates
``A_p sin(2 pi f_p (t - delay))`` (switched on causally at t = delay), with
per-node delays shaped so wavelets arrive at a configured focal point
simultaneously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig, derive
from .fractional import FractionalHistory
from .ode import UniformSeries

TAG_INTERIOR = 0
TAG_DIRICHLET = 1
TAG_NEUMANN = 2
TAG_EXCITED = 3


class NumericalError(RuntimeError):
    """Base class for failures of the wave stepper."""


class NondegeneracyError(NumericalError):
    """1 + 2 k p dropped below the configured floor."""

    def __init__(self, node: tuple[int, ...], time: float, value: float,
                 floor: float):
        self.node = node
        self.time = time
        self.value = value
        super().__init__(
            f"non-degeneracy violated at node {node}, t = {time:.9e}: "
            f"1 + 2 k p = {value:.6e} < {floor}")


class CorrectorError(NumericalError):
    """Newmark corrector failed to converge within the iteration budget."""


@dataclass(frozen=True)
class Grid:
    """Structured grid with boundary tags and excitation delays."""

    dim: int
    extents: tuple[float, ...]
    counts: tuple[int, ...]
    spacing: tuple[float, ...]
    tags: np.ndarray     # int8 per node
    delays: np.ndarray   # excitation delay per node [s]

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.linspace(0.0, L, n)
                     for L, n in zip(self.extents, self.counts))

    def nearest_node(self, point: tuple[float, ...]) -> tuple[int, ...]:
        if len(point) != self.dim:
            raise ValueError(f"point {point} does not match grid dim {self.dim}")
        return tuple(int(np.argmin(np.abs(ax - coord)))
                     for ax, coord in zip(self.axes(), point))

    def position(self, node: tuple[int, ...]) -> tuple[float, ...]:
        return tuple(h * i for h, i in zip(self.spacing, node))


def build_grid(cfg: SimulationConfig) -> Grid:
    if cfg.dim == 1:
        counts = (cfg.nx,)
        extents = (cfg.Lx,)
    else:
        counts = (cfg.nx, cfg.ny)
        extents = (cfg.Lx, cfg.Ly)
    spacing = tuple(L / (n - 1) for L, n in zip(extents, counts))

    tags = np.zeros(counts, dtype=np.int8)
    boundary_tag = TAG_DIRICHLET if cfg.boundary == "dirichlet" else TAG_NEUMANN
    if cfg.dim == 1:
        tags[0] = tags[-1] = boundary_tag
    else:
        tags[0, :] = tags[-1, :] = boundary_tag
        tags[:, 0] = tags[:, -1] = boundary_tag

    delays = np.zeros(counts, dtype=float)
    if cfg.A_p > 0:
        if cfg.dim == 1:
            tags[0] = TAG_EXCITED
            if cfg.focus_x >= 0:
                delays[0] = 0.0
        else:
            y = np.linspace(0.0, cfg.Ly, cfg.ny)
            span = (y >= cfg.excite_lo * cfg.Ly) & (y <= cfg.excite_hi * cfg.Ly)
            tags[0, span] = TAG_EXCITED
            if cfg.focus_x >= 0:
                dist = np.hypot(0.0 - cfg.focus_x, y[span] - cfg.focus_y)
                # fire farther nodes earlier so arrivals at the focus coincide
                delays[0, span] = (dist.max() - dist) / cfg.params.c
    return Grid(dim=cfg.dim, extents=extents, counts=counts, spacing=spacing,
                tags=tags, delays=delays)


def excitation_value(grid: Grid, amplitude: float, frequency: float,
                     t: float) -> np.ndarray:
    """Outward normal derivative data at time t (zero off the excited set)."""
    g = np.zeros(grid.counts, dtype=float)
    mask = grid.tags == TAG_EXCITED
    if amplitude != 0.0 and mask.any():
        shifted = t - grid.delays[mask]
        g[mask] = np.where(shifted >= 0.0,
                           amplitude * np.sin(2.0 * math.pi * frequency * shifted),
                           0.0)
    return g


def excitation_rate(grid: Grid, amplitude: float, frequency: float,
                    t: float) -> np.ndarray:
    """Time derivative of the excitation data (for damping-term ghosts)."""
    g = np.zeros(grid.counts, dtype=float)
    mask = grid.tags == TAG_EXCITED
    if amplitude != 0.0 and mask.any():
        shifted = t - grid.delays[mask]
        omega = 2.0 * math.pi * frequency
        g[mask] = np.where(shifted >= 0.0,
                           amplitude * omega * np.cos(omega * shifted),
                           0.0)
    return g


def discrete_laplacian(values: np.ndarray, grid: Grid,
                       neumann_data: np.ndarray | None = None) -> np.ndarray:
    """Second-order Laplacian; ghost nodes realize d/dn = neumann_data,
    Dirichlet rows are zero."""
    f = np.asarray(values, dtype=float)
    if f.shape != grid.counts:
        raise ValueError(f"field shape {f.shape} != grid shape {grid.counts}")
    g = neumann_data if neumann_data is not None else np.zeros(grid.counts)

    if grid.dim == 1:
        h = grid.spacing[0]
        lap = np.empty_like(f)
        lap[1:-1] = f[:-2] - 2.0 * f[1:-1] + f[2:]
        lap[0] = 2.0 * f[1] - 2.0 * f[0] + 2.0 * h * g[0]
        lap[-1] = 2.0 * f[-2] - 2.0 * f[-1] + 2.0 * h * g[-1]
        lap /= h * h
    else:
        hx, hy = grid.spacing
        dxx = np.empty_like(f)
        dxx[1:-1, :] = f[:-2, :] - 2.0 * f[1:-1, :] + f[2:, :]
        dxx[0, :] = 2.0 * f[1, :] - 2.0 * f[0, :] + 2.0 * hx * g[0, :]
        dxx[-1, :] = 2.0 * f[-2, :] - 2.0 * f[-1, :] + 2.0 * hx * g[-1, :]
        dyy = np.empty_like(f)
        dyy[:, 1:-1] = f[:, :-2] - 2.0 * f[:, 1:-1] + f[:, 2:]
        dyy[:, 0] = 2.0 * f[:, 1] - 2.0 * f[:, 0] + 2.0 * hy * g[:, 0]
        dyy[:, -1] = 2.0 * f[:, -2] - 2.0 * f[:, -1] + 2.0 * hy * g[:, -1]
        lap = dxx / (hx * hx) + dyy / (hy * hy)
    lap[grid.tags == TAG_DIRICHLET] = 0.0
    return lap


def load_k_field(cfg: SimulationConfig, grid: Grid) -> np.ndarray:
    """Nonlinearity coefficient per node: constant, or CSV x[,y],k profile
    mapped to nearest nodes."""
    k = np.full(grid.counts, cfg.params.k_coeff, dtype=float)
    if cfg.k_profile:
        data = np.genfromtxt(cfg.k_profile, delimiter=",", names=True)
        names = data.dtype.names
        expected = grid.dim + 1
        if names is None or len(names) < expected:
            raise ValueError(f"{cfg.k_profile}: need {expected} columns for "
                             f"a {grid.dim}D profile")
        rows = np.atleast_1d(data)
        for row in rows:
            point = tuple(float(row[names[i]]) for i in range(grid.dim))
            k[grid.nearest_node(point)] = float(row[names[grid.dim]])
    return k


@dataclass
class ProbeTrace:
    """Pressure recorded at one node, one sample per wave step."""

    node: tuple[int, ...]
    location: tuple[float, ...]
    series: UniformSeries


class WaveStepper:
    """Newmark predictor-corrector time integrator for the damped wave
    equation on a :class:`Grid`."""

    def __init__(self, cfg: SimulationConfig, grid: Grid | None = None):
        self.cfg = cfg
        self.grid = grid if grid is not None else build_grid(cfg)
        p = cfg.params
        self.c2 = p.c * p.c
        h_min = min(self.grid.spacing)
        self.dt = cfg.dt_wave if cfg.dt_wave > 0 else cfg.cfl * h_min / p.c
        self.k = load_k_field(cfg, self.grid)
        self.alpha = p.alpha
        self.velocity_damping = (cfg.damping == "strong") or (p.alpha == 1.0)
        if cfg.damping == "strong":
            self.b_eff = p.b_diff
        else:
            self.b_eff = p.b_diff * p.tau ** (p.alpha - 1.0)

        shape = self.grid.counts
        self.p = np.zeros(shape)
        self.pt = np.zeros(shape)
        self.ptt = np.zeros(shape)
        self.t = 0.0
        self.n = 0
        self._dirichlet = self.grid.tags == TAG_DIRICHLET

        self.history: FractionalHistory | None = None
        self._g_history: FractionalHistory | None = None
        if not self.velocity_damping:
            self.history = FractionalHistory(p.alpha, self.dt, shape)
            self.history.push(self.p)
            self._g_history = FractionalHistory(p.alpha, self.dt, shape)
            self._g_history.push(excitation_value(self.grid, cfg.A_p, cfg.f_p, 0.0))

        self.gamma_min = math.inf
        self.corrector_iters_max = 0

    def set_state(self, p, pt, ptt) -> None:
        """Overwrite the current state (testing hook); resets histories."""
        self.p = np.array(p, dtype=float, copy=True)
        self.pt = np.array(pt, dtype=float, copy=True)
        self.ptt = np.array(ptt, dtype=float, copy=True)
        if self.history is not None:
            params = self.cfg.params
            self.history = FractionalHistory(params.alpha, self.dt, self.grid.counts)
            self.history.push(self.p)

    def newmark_step(self, source: np.ndarray | None = None) -> None:
        """Advance one step of size dt; *source* is the forcing field at the
        new time level (zeros when omitted)."""
        cfg = self.cfg
        dt = self.dt
        t1 = self.t + dt
        beta_dt2 = cfg.beta_n * dt * dt
        gamma_dt = cfg.gamma_n * dt

        p_pred = self.p + dt * self.pt + (0.5 - cfg.beta_n) * dt * dt * self.ptt
        pt_pred = self.pt + (1.0 - cfg.gamma_n) * dt * self.ptt

        g1 = excitation_value(self.grid, cfg.A_p, cfg.f_p, t1)
        if self.velocity_damping:
            g1_t = excitation_rate(self.grid, cfg.A_p, cfg.f_p, t1)
            mem = dg = None
        else:
            g1_t = None
            mem = self.history.memory_sum()
            dg = self._g_history.derivative(g1)
            self._pending_g = g1

        src = source if source is not None else 0.0
        a = self.ptt.copy()
        converged = False
        for iteration in range(1, cfg.newmark_max_iters + 1):
            p_i = p_pred + beta_dt2 * a
            pt_i = pt_pred + gamma_dt * a
            p_i[self._dirichlet] = 0.0
            pt_i[self._dirichlet] = 0.0

            mass = 1.0 + 2.0 * self.k * p_i
            self._check_mass(mass, t1)

            rhs = src + self.c2 * discrete_laplacian(p_i, self.grid, g1)
            if self.velocity_damping:
                if self.b_eff != 0.0:
                    rhs = rhs + self.b_eff * discrete_laplacian(pt_i, self.grid, g1_t)
            else:
                d_frac = self.history.derivative(p_i)
                rhs = rhs + self.b_eff * discrete_laplacian(d_frac, self.grid, dg)
            rhs = rhs - 2.0 * self.k * pt_i * pt_i

            a_new = rhs / mass
            a_new[self._dirichlet] = 0.0
            delta = float(np.max(np.abs(a_new - a)))
            scale = max(float(np.max(np.abs(a_new))), 1.0)
            a = a_new
            if delta <= cfg.newmark_tol * scale:
                converged = True
                if iteration > self.corrector_iters_max:
                    self.corrector_iters_max = iteration
                break
        if not converged:
            raise CorrectorError(
                f"Newmark corrector did not reach tol {cfg.newmark_tol} within "
                f"{cfg.newmark_max_iters} iterations at t = {t1:.9e}")

        p1 = p_pred + beta_dt2 * a
        pt1 = pt_pred + gamma_dt * a
        p1[self._dirichlet] = 0.0
        pt1[self._dirichlet] = 0.0

        mass1 = 1.0 + 2.0 * self.k * p1
        self._check_mass(mass1, t1)
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(pt1))
                and np.all(np.isfinite(a))):
            raise NumericalError(f"non-finite field state at t = {t1:.9e}")
        gmin = float(mass1.min())
        if gmin < self.gamma_min:
            self.gamma_min = gmin

        self.p = p1
        self.pt = pt1
        self.ptt = a
        self.t = t1
        self.n += 1
        if not self.velocity_damping:
            self.history.push(p1)
            self._g_history.push(self._pending_g)

    def _check_mass(self, mass: np.ndarray, t1: float) -> None:
        m_min = float(mass.min())
        if m_min < self.cfg.gamma_floor:
            node = np.unravel_index(int(np.argmin(mass)), mass.shape)
            raise NondegeneracyError(tuple(int(i) for i in node), t1, m_min,
                                     self.cfg.gamma_floor)

    def energy(self) -> float:
        """Discrete wave energy ||p_t||^2 + c^2 ||grad p||^2 (h-weighted)."""
        weight = float(np.prod(self.grid.spacing))
        total = float(np.sum(self.pt * self.pt)) * weight
        if self.grid.dim == 1:
            h = self.grid.spacing[0]
            gx = np.diff(self.p) / h
            total += self.c2 * float(np.sum(gx * gx)) * weight
        else:
            hx, hy = self.grid.spacing
            gx = np.diff(self.p, axis=0) / hx
            gy = np.diff(self.p, axis=1) / hy
            total += self.c2 * (float(np.sum(gx * gx)) + float(np.sum(gy * gy))) * weight
        return total


@dataclass
class WaveResult:
    """Outcome of a wave run: probes, optional snapshots, monitors."""

    grid: Grid
    dt: float
    n_steps: int
    probes: list[ProbeTrace]
    snapshot_times: list[float]
    snapshots: list[np.ndarray]
    gamma_min: float
    corrector_iters_max: int


class FieldRecorder:
    """Collects probe samples every step and evenly spaced snapshots.

    Shared by run_wave and the coupled stepper so both record through
    literally the same code (their outputs must agree to the byte when the
    coupling constant is zero)."""

    def __init__(self, cfg: SimulationConfig, st: WaveStepper, n_steps: int,
                 collect_fields: bool = False):
        self.n_steps = n_steps
        self.collect_fields = collect_fields
        self.probe_nodes = [st.grid.nearest_node(p) for p in cfg.probes]
        self.probe_vals = np.zeros((len(self.probe_nodes), n_steps + 1))
        self.want = np.array([], dtype=int)
        if cfg.n_snapshots > 0:
            self.want = np.unique(
                np.round(np.linspace(0, n_steps, cfg.n_snapshots)).astype(int))
        self.snapshot_times: list[float] = []
        self.snapshots: list[np.ndarray] = []
        self.record(0, st)

    def record(self, step: int, st: WaveStepper) -> None:
        for i, node in enumerate(self.probe_nodes):
            self.probe_vals[i, step] = st.p[node]
        if step in self.want or self.collect_fields:
            self.snapshot_times.append(st.t)
            self.snapshots.append(st.p.copy())

    def result(self, st: WaveStepper) -> WaveResult:
        axes = st.grid.axes()
        probes = []
        for i, node in enumerate(self.probe_nodes):
            location = tuple(float(axes[d][node[d]]) for d in range(st.grid.dim))
            probes.append(ProbeTrace(node=node, location=location,
                                     series=UniformSeries(0.0, st.dt,
                                                          self.probe_vals[i])))
        return WaveResult(grid=st.grid, dt=st.dt, n_steps=self.n_steps,
                          probes=probes, snapshot_times=self.snapshot_times,
                          snapshots=self.snapshots, gamma_min=st.gamma_min,
                          corrector_iters_max=st.corrector_iters_max)


def step_count(cfg: SimulationConfig, dt: float) -> int:
    """Number of steps covering [0, T_wave] (last step may overshoot)."""
    return max(1, int(math.ceil(cfg.T_wave / dt - 1e-9)))


def run_wave(cfg: SimulationConfig, *, stepper: WaveStepper | None = None,
             source_fn=None, collect_fields: bool = False) -> WaveResult:
    """Run the wave solver over [0, T_wave], recording probes every step and
    n_snapshots evenly spaced field snapshots."""
    st = stepper if stepper is not None else WaveStepper(cfg)
    n_steps = step_count(cfg, st.dt)
    rec = FieldRecorder(cfg, st, n_steps, collect_fields)
    for step in range(1, n_steps + 1):
        src = source_fn(st.t + st.dt) if source_fn is not None else None
        st.newmark_step(src)
        rec.record(step, st)
    return rec.result(st)


def write_probe_csv(path, trace: ProbeTrace) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("t,p\n")
        for t, v in zip(trace.series.times(), trace.series.values):
            handle.write(f"{t:.17e},{v:.17e}\n")


def write_snapshot_csv(path, grid: Grid, field_values: np.ndarray) -> None:
    axes = grid.axes()
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if grid.dim == 1:
            handle.write("x,p\n")
            for x, v in zip(axes[0], field_values):
                handle.write(f"{x:.17e},{v:.17e}\n")
        else:
            handle.write("x,y,p\n")
            for i, x in enumerate(axes[0]):
                for j, y in enumerate(axes[1]):
                    handle.write(f"{x:.17e},{y:.17e},{field_values[i, j]:.17e}\n")
