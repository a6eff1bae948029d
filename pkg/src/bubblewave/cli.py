"""Command line front end: run orchestration and artifact emission.

Every subcommand resolves a :class:`SimulationConfig` from defaults, an
optional ``--config`` file, and per-key ``--<key>`` overrides, then writes
its artifacts (CSV, SVG, report) plus a run manifest into the output
directory. Exit codes: 0 success, 1 usage error, 2 numerical failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis, fractional
from .config import (ConfigError, SimulationConfig, apply_overrides,
                     config_keys, config_snapshot, load_config, require_valid)
from .coupling import CouplingError, run_coupled, run_one_way
from .models import ModelKind
from .ode import (UniformSeries, read_series_csv, resample_uniform,
                  simulate_bubble, write_trajectory_csv)
from .wave import (NumericalError, WaveStepper, run_wave, step_count,
                   write_probe_csv, write_snapshot_csv)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


# ---------------------------------------------------------------------------
# SVG emission

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f")
_W, _H = 640, 400
_ML, _MR, _MT, _MB = 76, 16, 26, 46


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def emit_svg(curves, labels, path, *, title: str = "", xlabel: str = "",
             ylabel: str = "", logy: bool = False) -> None:
    """Write a minimal deterministic line plot.

    *curves* is a sequence of (x, y) array pairs; one polyline per curve.
    Output bytes depend only on the inputs (no timestamps, no randomness).
    """
    if not curves:
        raise ValueError("emit_svg needs at least one curve")
    if len(labels) != len(curves):
        raise ValueError("one label per curve required")

    prepared = []
    for x, y in curves:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size > 2048:
            # more points than pixels: thin deterministically for the plot
            idx = np.unique(np.linspace(0, x.size - 1, 2048).round()
                            .astype(int))
            x = x[idx]
            y = y[idx]
        if logy:
            positive = y[y > 0]
            floor = positive.min() * 1e-3 if positive.size else 1e-300
            y = np.log10(np.maximum(y, floor))
        prepared.append((x, y))

    x_lo = min(float(x.min()) for x, _ in prepared)
    x_hi = max(float(x.max()) for x, _ in prepared)
    y_lo = min(float(y.min()) for _, y in prepared)
    y_hi = max(float(y.max()) for _, y in prepared)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        pad = abs(y_hi) * 0.1 or 1.0
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = (y_hi - y_lo) * 0.05
        y_lo, y_hi = y_lo - pad, y_hi + pad

    px_w = _W - _ML - _MR
    px_h = _H - _MT - _MB

    def sx(v: float) -> float:
        return _ML + (v - x_lo) / (x_hi - x_lo) * px_w

    def sy(v: float) -> float:
        return _MT + (y_hi - v) / (y_hi - y_lo) * px_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{px_w}" height="{px_h}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{_W / 2:.1f}" y="17" text-anchor="middle" '
                     f'font-family="monospace" font-size="13">{title}</text>')

    for tv in _ticks(x_lo, x_hi):
        px = sx(tv)
        parts.append(f'<line x1="{px:.2f}" y1="{_MT + px_h}" x2="{px:.2f}" '
                     f'y2="{_MT + px_h + 5}" stroke="#444444"/>')
        parts.append(f'<text x="{px:.2f}" y="{_MT + px_h + 18}" '
                     'text-anchor="middle" font-family="monospace" '
                     f'font-size="10">{tv:.4g}</text>')
    for tv in _ticks(y_lo, y_hi):
        py = sy(tv)
        label = f"1e{tv:.2f}" if logy else f"{tv:.4g}"
        parts.append(f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" '
                     f'y2="{py:.2f}" stroke="#444444"/>')
        parts.append(f'<text x="{_ML - 8}" y="{py + 3:.2f}" text-anchor="end" '
                     f'font-family="monospace" font-size="10">{label}</text>')
    if xlabel:
        parts.append(f'<text x="{_ML + px_w / 2:.1f}" y="{_H - 8}" '
                     'text-anchor="middle" font-family="monospace" '
                     f'font-size="11">{xlabel}</text>')
    if ylabel:
        yc = _MT + px_h / 2
        parts.append(f'<text x="14" y="{yc:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 14 {yc:.1f})" '
                     f'font-family="monospace" font-size="11">{ylabel}</text>')

    for i, (x, y) in enumerate(prepared):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(float(a)):.2f},{sy(float(b)):.2f}"
                       for a, b in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.3"/>')

    for i, label in enumerate(labels):
        color = _PALETTE[i % len(_PALETTE)]
        ly = _MT + 14 + 14 * i
        parts.append(f'<line x1="{_ML + px_w - 150}" y1="{ly - 4}" '
                     f'x2="{_ML + px_w - 130}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_ML + px_w - 124}" y="{ly}" '
                     f'font-family="monospace" font-size="10">{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Run manifest

@dataclass
class RunManifest:
    """Record of one CLI invocation: inputs, outputs, and monitors."""

    subcommand: str
    snapshots: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    duration_s: float = 0.0
    termination: str = "completed"
    monitors: dict = field(default_factory=dict)
    figure: str = ""
    seed: int | None = None

    def write(self, path: str) -> None:
        body = {
            "subcommand": self.subcommand,
            "snapshots": self.snapshots,
            "outputs": self.outputs,
            "duration_s": self.duration_s,
            "termination": self.termination,
            "monitors": self.monitors,
        }
        if self.figure:
            body["figure"] = self.figure
        if self.seed is not None:
            body["seed"] = self.seed
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(body, handle, indent=2, sort_keys=True)
            handle.write("\n")

    @staticmethod
    def load(path: str) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as handle:
            body = json.load(handle)
        return RunManifest(subcommand=body["subcommand"],
                           snapshots=list(body["snapshots"]),
                           outputs=list(body["outputs"]),
                           duration_s=float(body["duration_s"]),
                           termination=body["termination"],
                           monitors=dict(body["monitors"]),
                           figure=body.get("figure", ""),
                           seed=body.get("seed"))


class _Runner:
    """Collects artifacts for one invocation under a single output dir."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.outputs: list[str] = []
        self.snapshots: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add(self, name: str) -> str:
        self.outputs.append(name)
        return self.path(name)

    def snapshot(self, cfg: SimulationConfig, name: str = "snapshot.cfg") -> None:
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as f:
            f.write(config_snapshot(cfg))
        self.snapshots.append(name)


# ---------------------------------------------------------------------------
# Subcommand bodies. Each returns (termination, monitors).

def _node_slug(node: tuple[int, ...]) -> str:
    return "_".join(str(i) for i in node)


def _write_wave_artifacts(run: _Runner, res, prefix: str = "") -> None:
    curves, labels = [], []
    for i, trace in enumerate(res.probes):
        write_probe_csv(run.add(f"{prefix}probe_{i}.csv"), trace)
        t = trace.series.t0 + trace.series.dt * np.arange(trace.series.values.size)
        curves.append((t, trace.series.values))
        labels.append("probe " + ",".join(f"{v:g}" for v in
                                          res.grid.position(trace.node)))
    if curves:
        emit_svg(curves, labels, run.add(f"{prefix}probes.svg"),
                 title="probe pressure", xlabel="t [s]", ylabel="p [Pa]")
    if res.snapshots:
        index_lines = ["file,t"]
        for j, (t_snap, frame) in enumerate(zip(res.snapshot_times,
                                                res.snapshots)):
            name = f"{prefix}snapshot_{j}.csv"
            write_snapshot_csv(run.add(name), res.grid, frame)
            index_lines.append(f"{name},{t_snap:.17e}")
        with open(run.add(f"{prefix}snapshots_index.csv"), "w",
                  encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(index_lines) + "\n")


def _write_bubble_artifacts(run: _Runner, bubbles: dict, prefix: str = "") -> None:
    curves, labels = [], []
    for node, traj in bubbles.items():
        write_trajectory_csv(run.add(f"{prefix}bubble_{_node_slug(node)}.csv"),
                             traj)
        curves.append((traj.times, traj.radii))
        labels.append(f"node {_node_slug(node)}")
    if curves:
        emit_svg(curves, labels, run.add(f"{prefix}bubbles.svg"),
                 title="bubble radius at coupled nodes",
                 xlabel="t [s]", ylabel="R [m]")


def cmd_bubble(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    traj = simulate_bubble(cfg)
    write_trajectory_csv(run.add("trajectory.csv"), traj)
    emit_svg([(traj.times, traj.radii)],
             [f"{cfg.model} A={cfg.A:g} f={cfg.f:g}"],
             run.add("trajectory.svg"),
             title="bubble radius", xlabel="t [s]", ylabel="R [m]")
    analysis.write_report(run.add("report.txt"), {
        "model": cfg.model,
        "termination": traj.termination,
        "n_steps": traj.n_steps,
        "min_radius": traj.min_radius,
        "max_radius": traj.max_radius,
        "max_growth": traj.max_radius / cfg.params.R0,
        "dt_smallest": traj.dt_smallest,
        "dt_largest": traj.dt_largest,
    })
    return traj.termination, {"min_radius": traj.min_radius}


def cmd_wave(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    res = run_wave(cfg)
    _write_wave_artifacts(run, res)
    analysis.write_report(run.add("report.txt"), {
        "damping": cfg.damping,
        "dt": res.dt,
        "n_steps": res.n_steps,
        "gamma_min": res.gamma_min,
        "corrector_iters_max": res.corrector_iters_max,
    })
    return "completed", {"gamma_min": res.gamma_min}


def _worst_termination(bubbles: dict) -> str:
    for traj in bubbles.values():
        if traj.termination != "completed":
            return traj.termination
    return "completed"


def cmd_oneway(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    res = run_one_way(cfg)
    _write_wave_artifacts(run, res.wave)
    _write_bubble_artifacts(run, res.bubbles)
    min_r = min((t.min_radius for t in res.bubbles.values()), default=math.nan)
    analysis.write_report(run.add("report.txt"), {
        "bubbles": len(res.bubbles),
        "gamma_min": res.wave.gamma_min,
        "min_radius": min_r,
    })
    return _worst_termination(res.bubbles), {
        "gamma_min": res.wave.gamma_min, "min_radius": min_r}


def cmd_coupled(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    res = run_coupled(cfg)
    _write_wave_artifacts(run, res.wave)
    _write_bubble_artifacts(run, res.bubbles)
    min_r = min((t.min_radius for t in res.bubbles.values()), default=math.nan)
    analysis.write_report(run.add("report.txt"), {
        "bubbles": len(res.bubbles),
        "micro_steps": res.micro_steps,
        "gamma_min": res.wave.gamma_min,
        "min_radius": min_r,
    })
    return _worst_termination(res.bubbles), {
        "gamma_min": res.wave.gamma_min, "min_radius": min_r,
        "micro_steps": res.micro_steps}


def cmd_spectrum(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    termination = "completed"
    monitors: dict = {}
    if args.input:
        t, v = read_series_csv(args.input)
        series = resample_uniform(t, v, cfg.fft_n)
        spec = analysis.fft_spectrum(series, window=cfg.fft_window,
                                     f_drive=cfg.f)
    else:
        traj = simulate_bubble(cfg)
        termination = traj.termination
        monitors["min_radius"] = traj.min_radius
        spec = analysis.bubble_spectrum(traj, cfg.f, periods=cfg.fft_periods,
                                        n=cfg.fft_n, window=cfg.fft_window)
    metrics = analysis.harmonic_metrics(spec, cfg.f)
    analysis.write_spectrum_csv(run.add("spectrum.csv"), spec)
    emit_svg([(spec.frequencies, spec.magnitudes)], ["magnitude"],
             run.add("spectrum.svg"), title="spectrum",
             xlabel="f [Hz]", ylabel="log10 magnitude", logy=True)
    report = {
        "source": args.input or "bubble run",
        "window": spec.window,
        "bin_width": spec.bin_width,
        "fundamental": metrics.fundamental,
        "subharmonic": metrics.subharmonic,
        "thd": metrics.thd,
    }
    for i, h in enumerate(metrics.harmonics, start=2):
        report[f"harmonic_{i}f"] = h
    analysis.write_report(run.add("report.txt"), report)
    return termination, monitors


# --- convergence studies ---------------------------------------------------

def _study_rk4(cfg: SimulationConfig) -> analysis.ConvergenceStudy:
    """Fixed-step RK4 against the analytic undamped volume oscillator."""
    base = apply_overrides(cfg, {
        "model": "linear_volume", "delta": "0", "volume_nonlinear": "false",
        "A": "0", "T": repr(3e-6), "store_stride": "1000000",
    })
    p = base.params
    omega0 = math.sqrt(3.0 * p.kappa * p.p_stat / (p.rho0 * p.R0 ** 2))
    v0 = 4.0 / 3.0 * math.pi * p.R0 ** 3
    r_init = p.R0 * 1.001
    v_init = 4.0 / 3.0 * math.pi * r_init ** 3 - v0

    def runner(dt: float) -> float:
        cfg_dt = apply_overrides(base, {"dt_min": repr(dt), "dt_max": repr(dt)})
        traj = simulate_bubble(cfg_dt, initial=(r_init, 0.0))
        t_end = float(traj.times[-1])
        r_ref = (3.0 / (4.0 * math.pi)
                 * (v0 + v_init * math.cos(omega0 * t_end))) ** (1.0 / 3.0)
        return abs(float(traj.radii[-1]) - r_ref) / p.R0

    return analysis.convergence_order(runner, [8e-9, 4e-9, 2e-9])


def _study_newmark(cfg: SimulationConfig) -> analysis.ConvergenceStudy:
    """Joint dt-h refinement on the 1D Dirichlet standing wave."""
    base = apply_overrides(cfg, {
        "dim": "1", "Lx": "1", "boundary": "dirichlet", "A_p": "0",
        "k": "0", "b": "0", "damping": "strong", "cfl": "0.3",
        "gamma_n": "0.5", "beta_n": "0.25", "probes": "", "n_snapshots": "0",
    })
    c = base.params.c
    L = base.Lx
    period = 2.0 * L / c

    dts, errors = [], []
    for nx in (51, 101, 201):
        cfg_n = apply_overrides(base, {"nx": str(nx)})
        st = WaveStepper(cfg_n)
        x = st.grid.axes()[0]
        p0 = np.sin(math.pi * x / L)
        st.set_state(p0, np.zeros_like(p0),
                     -(c * math.pi / L) ** 2 * p0)
        n = max(1, round(period / st.dt))
        for _ in range(n):
            st.newmark_step()
        t_end = n * st.dt
        ref = math.cos(c * math.pi * t_end / L) * p0
        h = st.grid.spacing[0]
        errors.append(float(np.sqrt(np.sum((st.p - ref) ** 2) * h)))
        dts.append(st.dt)
    return analysis.fit_order(dts, errors)


def _study_l1(cfg: SimulationConfig, alpha: float) -> analysis.ConvergenceStudy:
    """L1 Caputo derivative of t^2 against 2 t^(2-a) / Gamma(3-a)."""
    def runner(dt: float) -> float:
        n = round(1.0 / dt)
        t = dt * np.arange(n + 1)
        approx = fractional.caputo_derivative(t ** 2, dt, alpha)
        exact = 2.0 * t ** (2.0 - alpha) / math.gamma(3.0 - alpha)
        return float(np.max(np.abs(approx[1:] - exact[1:])))

    return analysis.convergence_order(runner, [1.0 / 64, 1.0 / 128, 1.0 / 256])


def cmd_convergence(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    run.snapshot(cfg)
    wanted = ("rk4", "newmark", "l1") if args.study == "all" else (args.study,)
    report: dict = {}
    for study in wanted:
        if study == "l1":
            lines = ["alpha,dt,error"]
            for alpha in (0.3, 0.5, 0.8):
                cs = _study_l1(cfg, alpha)
                report[f"order_l1_alpha_{alpha:g}"] = cs.order
                for d, e in zip(cs.dts, cs.errors):
                    lines.append(f"{alpha:g},{d:.17e},{e:.17e}")
            with open(run.add("convergence_l1.csv"), "w", encoding="utf-8",
                      newline="\n") as handle:
                handle.write("\n".join(lines) + "\n")
            continue
        cs = _study_rk4(cfg) if study == "rk4" else _study_newmark(cfg)
        report[f"order_{study}"] = cs.order
        with open(run.add(f"convergence_{study}.csv"), "w", encoding="utf-8",
                  newline="\n") as handle:
            handle.write("dt,error\n")
            for d, e in zip(cs.dts, cs.errors):
                handle.write(f"{d:.17e},{e:.17e}\n")
        emit_svg([(np.log10(cs.dts), np.log10(cs.errors))],
                 [f"order {cs.order:.2f}"],
                 run.add(f"convergence_{study}.svg"),
                 title=f"{study} refinement", xlabel="log10 dt",
                 ylabel="log10 error")
    analysis.write_report(run.add("report.txt"), report)
    for key, value in report.items():
        print(f"{key} = {value:.3f}")
    return "completed", {}


def cmd_bench(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    from .benchmark import run_benchmark
    run.snapshot(cfg)
    rows = run_benchmark(repeat=args.repeat)
    report: dict = {}
    for row in rows:
        report[f"{row.name}_steps"] = row.n_steps
        report[f"{row.name}_compiled_s"] = row.compiled_s
        report[f"{row.name}_python_s"] = row.python_s
        report[f"{row.name}_speedup"] = row.speedup
        report[f"{row.name}_bitwise_equal"] = row.bitwise_equal
        print(f"{row.name}: compiled {row.compiled_s:.3f} s, "
              f"python {row.python_s:.3f} s, speedup {row.speedup:.1f}x, "
              f"bitwise_equal={row.bitwise_equal}")
    analysis.write_report(run.add("bench.txt"), report)
    if not all(row.bitwise_equal for row in rows):
        raise NumericalError("compiled and pure-python kernels disagree")
    return "completed", {}


# --- reproduce presets -----------------------------------------------------

def _preset_overview(full: bool):
    runs = []
    for a_mpa in (1, 5, 10):
        for f_mhz in (0.2, 0.5):
            runs.append((f"A{a_mpa}MPa_f{f_mhz:g}MHz", "bubble", {
                "model": "rp_coated", "A": repr(a_mpa * 1e6),
                "f": repr(f_mhz * 1e6), "T": "2e-5",
            }))
    return runs, "radius-time sensitivity to drive amplitude and frequency"


def _preset_highfreq(full: bool):
    runs = []
    for f_mhz in (0.5, 1.0, 5.0):
        runs.append((f"f{f_mhz:g}MHz", "bubble+spectrum", {
            "model": "rp_coated", "A": "15e6", "f": repr(f_mhz * 1e6),
            "T": "2e-5",
        }))
    return runs, "coated bubble at high driving frequencies"


def _preset_model_comparison(full: bool):
    runs = []
    for model in ("rp_coated", "rp_radiation"):
        for f_mhz in (0.1, 0.15):
            runs.append((f"{model}_f{f_mhz:g}MHz", "bubble", {
                "model": model, "A": "0.15e6", "f": repr(f_mhz * 1e6),
                "T": "5e-5", "mu": "0.89e-3",
            }))
    return runs, "coated vs non-coated bubble response"


def _preset_noncoated_amplitudes(full: bool):
    runs = []
    for a_mpa in (0.01, 0.05, 0.15):
        runs.append((f"A{a_mpa:g}MPa", "bubble+spectrum", {
            "model": "rp_radiation", "A": repr(a_mpa * 1e6), "f": "0.15e6",
            "T": "5e-5", "mu": "0.89e-3",
        }))
    return runs, "non-coated bubble amplitude sweep"


_FOCUS_DESK = {
    "dim": "2", "Lx": "0.6", "Ly": "0.6", "nx": "121", "ny": "121",
    "boundary": "dirichlet", "excite_lo": "0.1", "excite_hi": "0.9",
    "focus_x": "0.25", "focus_y": "0.3", "f_p": "15e3", "A_p": "1e5",
    "T_wave": "6e-4", "damping": "strong", "b": "4.5e-6", "k": "1e-8",
    "probes": "0.03,0.3;0.25,0.3",
}
_FOCUS_FULL = dict(_FOCUS_DESK, nx="241", ny="241", T_wave="1e-3")


def _preset_wave_focus(full: bool):
    over = dict(_FOCUS_FULL if full else _FOCUS_DESK, n_snapshots="6")
    return [("focused", "wave", over)], "2D focused excitation"


def _preset_wave_probes(full: bool):
    over = {
        "dim": "1", "Lx": "1", "nx": "401" if full else "201",
        "boundary": "neumann", "f_p": "15e3", "A_p": "1e5",
        "T_wave": "2e-3" if full else "1e-3", "damping": "strong",
        "b": "4.5e-6", "probes": "0.25;0.5;0.75", "n_snapshots": "4",
    }
    return [("plane", "wave", over)], "1D plane-wave propagation"


def _preset_oneway(model: str, full: bool):
    over = dict(_FOCUS_FULL if full else _FOCUS_DESK)
    over.update({"model": model, "probes": "0.03,0.3;0.25,0.3",
                 "store_stride": "200"})
    return [(model, "oneway", over)], f"one-way driven {model} bubble"


def _preset_damping_comparison(full: bool):
    runs = []
    for damping in ("strong", "fractional"):
        runs.append((damping, "wave", {
            "dim": "1", "Lx": "1", "nx": "401" if full else "201",
            "boundary": "neumann", "f_p": "15e3", "A_p": "1e5",
            "T_wave": "1.2e-3", "damping": damping, "b": "1e-3",
            "alpha": "0.5", "tau": "1e-12", "probes": "0.7",
        }))
    return runs, "strong vs fractional attenuation at one probe"


_PRESETS = {
    "fig-overview": _preset_overview,
    "fig-highfreq": _preset_highfreq,
    "fig-model-comparison": _preset_model_comparison,
    "fig-noncoated-amplitudes": _preset_noncoated_amplitudes,
    "fig-wave-focus": _preset_wave_focus,
    "fig-wave-probes": _preset_wave_probes,
    "fig-oneway-coated": lambda full: _preset_oneway("rp_coated", full),
    "fig-oneway-noncoated": lambda full: _preset_oneway("rp_radiation", full),
    "fig-damping-comparison": _preset_damping_comparison,
}


def cmd_reproduce(cfg: SimulationConfig, run: _Runner, args) -> tuple[str, dict]:
    runs, description = _PRESETS[args.figure](args.full_scale)
    termination = "completed"
    monitors: dict = {}
    overlay_curves, overlay_labels = [], []
    damping_report: dict = {"description": description}

    for slug, kind, overrides in runs:
        run_cfg = apply_overrides(cfg, overrides)
        run.snapshot(run_cfg, f"snapshot_{slug}.cfg")
        prefix = f"{slug}_"
        if kind.startswith("bubble"):
            traj = simulate_bubble(run_cfg)
            if traj.termination != "completed":
                termination = traj.termination
            monitors["min_radius"] = min(monitors.get("min_radius", math.inf),
                                         traj.min_radius)
            write_trajectory_csv(run.add(f"{prefix}trajectory.csv"), traj)
            overlay_curves.append((traj.times, traj.radii))
            overlay_labels.append(slug)
            if kind == "bubble+spectrum":
                spec = analysis.bubble_spectrum(
                    traj, run_cfg.f, periods=run_cfg.fft_periods,
                    n=run_cfg.fft_n, window=run_cfg.fft_window)
                analysis.write_spectrum_csv(run.add(f"{prefix}spectrum.csv"),
                                            spec)
                emit_svg([(spec.frequencies, spec.magnitudes)], [slug],
                         run.add(f"{prefix}spectrum.svg"), title="spectrum",
                         xlabel="f [Hz]", ylabel="log10 magnitude", logy=True)
        elif kind == "wave":
            res = run_wave(run_cfg)
            monitors["gamma_min"] = min(monitors.get("gamma_min", math.inf),
                                        res.gamma_min)
            _write_wave_artifacts(run, res, prefix)
            trace = res.probes[-1]
            t = (trace.series.t0
                 + trace.series.dt * np.arange(trace.series.values.size))
            overlay_curves.append((t, trace.series.values))
            overlay_labels.append(slug)
            if args.figure == "fig-damping-comparison":
                series = trace.series
                damping_report[f"{slug}_peak_amplitude"] = float(
                    np.max(np.abs(series.values)))
                damping_report[f"{slug}_slope_crest"] = analysis.slope_crest(
                    series)
        else:  # oneway
            res = run_one_way(run_cfg)
            monitors["gamma_min"] = min(monitors.get("gamma_min", math.inf),
                                        res.wave.gamma_min)
            _write_wave_artifacts(run, res.wave, prefix)
            _write_bubble_artifacts(run, res.bubbles, prefix)
            if _worst_termination(res.bubbles) != "completed":
                termination = _worst_termination(res.bubbles)
            for traj in res.bubbles.values():
                monitors["min_radius"] = min(
                    monitors.get("min_radius", math.inf), traj.min_radius)
                overlay_curves.append((traj.times, traj.radii))
            overlay_labels.extend(f"{slug} node {_node_slug(n)}"
                                  for n in res.bubbles)

    ylabel = "R [m]" if runs[0][1].startswith("bubble") or \
        runs[0][1] == "oneway" else "p [Pa]"
    xcol = "t [s]"
    emit_svg(overlay_curves, overlay_labels, run.add(f"{args.figure}.svg"),
             title=description, xlabel=xcol, ylabel=ylabel)
    if len(damping_report) > 1:
        analysis.write_report(run.add("report.txt"), damping_report)
    return termination, monitors


# ---------------------------------------------------------------------------
# Argument parsing and dispatch

_COMMANDS = {
    "bubble": cmd_bubble,
    "wave": cmd_wave,
    "oneway": cmd_oneway,
    "coupled": cmd_coupled,
    "spectrum": cmd_spectrum,
    "convergence": cmd_convergence,
    "reproduce": cmd_reproduce,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bubblewave",
        description="Ultrasound-microbubble simulation runner")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", default=None,
                        help="key = value config file")
        sp.add_argument("--out-dir", default=None,
                        help="artifact directory (default ./out, or "
                             "BUBBLEWAVE_OUT)")
        sp.add_argument("--seed", type=int, default=None,
                        help="reserved for the property-test harness")
        sp.add_argument("--full-scale", action="store_true",
                        help="full-size parameters for reproduce presets")
        for key in config_keys():
            sp.add_argument(f"--{key}", dest=f"key_{key}", default=None,
                            metavar="V", help=argparse.SUPPRESS)

    for name in ("bubble", "wave", "oneway", "coupled", "spectrum",
                 "convergence", "reproduce", "bench"):
        sp = sub.add_parser(name)
        common(sp)
        if name == "wave":
            sp.add_argument("--attenuation", choices=("strong", "fractional"),
                            default=None, help="damping operator")
            sp.add_argument("--snapshots", type=int, default=None,
                            help="number of field snapshots")
        elif name == "spectrum":
            sp.add_argument("--input", default=None,
                            help="CSV trace to analyze instead of running")
        elif name == "convergence":
            sp.add_argument("--study",
                            choices=("rk4", "newmark", "l1", "all"),
                            default="all")
        elif name == "reproduce":
            sp.add_argument("figure", choices=sorted(_PRESETS))
        elif name == "bench":
            sp.add_argument("--repeat", type=int, default=3)
    return parser


def _collect_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for key in config_keys():
        raw = getattr(args, f"key_{key}", None)
        if raw is not None:
            overrides[key] = raw
    if getattr(args, "attenuation", None):
        overrides["damping"] = args.attenuation
    if getattr(args, "snapshots", None) is not None:
        overrides["n_snapshots"] = str(args.snapshots)
    return overrides


def _resolve_out_dir(args, cfg: SimulationConfig) -> str:
    if args.out_dir:
        return args.out_dir
    if cfg.out_dir:
        return cfg.out_dir
    return os.environ.get("BUBBLEWAVE_OUT") or "out"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    started = time.perf_counter()
    try:
        cfg = SimulationConfig()
        if args.config:
            cfg = load_config(args.config, base=cfg)
        cfg = require_valid(apply_overrides(cfg, _collect_overrides(args)))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        run = _Runner(_resolve_out_dir(args, cfg))
        termination, monitors = _COMMANDS[args.subcommand](cfg, run, args)
        manifest = RunManifest(
            subcommand=args.subcommand,
            snapshots=run.snapshots,
            outputs=run.outputs,
            duration_s=time.perf_counter() - started,
            termination=termination,
            monitors=monitors,
            figure=getattr(args, "figure", ""),
            seed=args.seed,
        )
        manifest.write(run.path("manifest.json"))
        missing = [n for n in run.outputs
                   if not os.path.exists(run.path(n))]
        if missing:
            print(f"error: missing outputs: {missing}", file=sys.stderr)
            return EXIT_IO
        print(f"{len(run.outputs)} artifacts in {run.out_dir} "
              f"({manifest.duration_s:.2f} s)")
        if termination != "completed":
            print(f"error: run terminated early: {termination}",
                  file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK
    except (NumericalError, CouplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
