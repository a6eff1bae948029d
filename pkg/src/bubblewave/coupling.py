"""Wave-field / bubble-cloud coupling.

One-way: the field is solved on its own, pressure traces recorded at probe
nodes drive independent bubble integrations. Two-way: on every macro step of
the wave solver the nodal forcing xi*(R^3)_tt is frozen at the step's start,
the field advances once, and each coupled node's bubble is sub-cycled across
the macro interval with the adaptive micro-stepper, seeing the nodal
pressure interpolated linearly in time between the old and new field values.
The splitting is explicit and first order by construction.

Micro windows tile the macro grid exactly, and every micro integration
resumes from the bitwise state its predecessor left behind. With xi = 0 the
field never sees the bubbles, so a coupled run reproduces run_wave sample
for sample, and the per-node bubbles reproduce trace-driven one-way runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import SimulationConfig, resolved_xi
from .ode import (BubbleTrajectory, PressureDrive, WindowedBubble,
                  simulate_bubble)
from .wave import (FieldRecorder, NumericalError, WaveResult, WaveStepper,
                   run_wave, step_count)

MICRO_RATIO_LIMIT = 10 ** 9


class CouplingError(NumericalError):
    """Coupled run cannot proceed (step-ratio overflow or a dead bubble)."""


def bubble_source(R: float, R_t: float, R_tt: float, xi: float):
    """Forcing density xi * (R^3)_tt = xi * (3 R^2 R_tt + 6 R R_t^2)."""
    return xi * (3.0 * R * R * R_tt + 6.0 * R * R_t * R_t)


@dataclass
class OneWayResult:
    """Field run plus the bubbles driven by its probe traces."""

    wave: WaveResult
    bubbles: dict[tuple[int, ...], BubbleTrajectory]


@dataclass
class CoupledResult:
    """Field run plus the bubbles sub-cycled inside it."""

    wave: WaveResult
    bubbles: dict[tuple[int, ...], BubbleTrajectory]
    micro_steps: int


def run_one_way(cfg: SimulationConfig) -> OneWayResult:
    """Solve the field alone, then drive one bubble per probe with the
    recorded pressure trace (zero coupling back into the field)."""
    wave_res = run_wave(cfg)
    bubbles: dict[tuple[int, ...], BubbleTrajectory] = {}
    for trace in wave_res.probes:
        drive = PressureDrive.from_samples(trace.series.t0, trace.series.dt,
                                           trace.series.values)
        bubbles[trace.node] = simulate_bubble(cfg, drive, t0=trace.series.t0,
                                              t_end=drive.end_time())
    return OneWayResult(wave=wave_res, bubbles=bubbles)


def coupled_nodes(grid, stride: int) -> list[tuple[int, ...]]:
    """Interior nodes carrying a bubble, subsampled by *stride* per axis."""
    interior = np.argwhere(grid.tags == 0)
    nodes = []
    for idx in interior:
        if all(int(i) % stride == 0 for i in idx):
            nodes.append(tuple(int(i) for i in idx))
    return nodes


def run_coupled(cfg: SimulationConfig) -> CoupledResult:
    """Advance field and bubbles together with multirate time stepping."""
    st = WaveStepper(cfg)
    if st.dt / cfg.dt_min > MICRO_RATIO_LIMIT:
        raise CouplingError(
            f"macro step {st.dt:.3e} s over micro floor {cfg.dt_min:.3e} s "
            f"allows more than {MICRO_RATIO_LIMIT:.0e} micro-steps per macro "
            f"step; reduce dt_wave or raise dt_min")
    n_steps = step_count(cfg, st.dt)
    rec = FieldRecorder(cfg, st, n_steps)
    xi = resolved_xi(cfg)

    nodes = coupled_nodes(st.grid, cfg.coupled_stride)
    tables = {node: np.zeros(n_steps + 1) for node in nodes}
    bubbles = {}
    for node in nodes:
        tables[node][0] = st.p[node]
        bubbles[node] = WindowedBubble(cfg, p_start=float(tables[node][0]))

    source = np.zeros(st.grid.counts)
    dtw = st.dt
    t_lo = 0.0
    micro_total = 0
    for step in range(1, n_steps + 1):
        # forcing frozen at the macro step's start
        for node in nodes:
            bub = bubbles[node]
            R, Rt = bub.radius_state
            Rtt = bub.radius_accel(float(st.p[node]))
            source[node] = bubble_source(R, Rt, Rtt, xi)
        st.newmark_step(source)
        rec.record(step, st)

        t_hi = float(step) * dtw
        for node in nodes:
            table = tables[node]
            table[step] = st.p[node]
            bub = bubbles[node]
            ok = bub.advance(t_lo, t_hi, _kernels.DRIVE_TABLE, 0.0, 0.0,
                             0.0, dtw, table[:step + 1])
            if not ok:
                traj = bub.trajectory()
                raise CouplingError(
                    f"bubble at node {node} stopped ({traj.termination}) "
                    f"inside macro step ending t = {t_hi:.9e}")
        t_lo = t_hi

    micro_total = sum(b.n_steps for b in bubbles.values())
    return CoupledResult(wave=rec.result(st),
                         bubbles={n: b.trajectory() for n, b in bubbles.items()},
                         micro_steps=micro_total)
