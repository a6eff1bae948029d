"""Timing harness for the bubble integration kernels.

Runs each kernel through its compiled entry point and through the
uncompiled implementation behind it (``python_impl``), on identical
arguments, and checks that the stored trajectories agree bitwise. When the
numpy fallback is active both paths are the same function and the speedup
reported is ~1.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import SimulationConfig, apply_overrides
from .ode import WindowedBubble


@dataclass(frozen=True)
class BenchRow:
    name: str
    backend: str
    n_steps: int
    compiled_s: float
    python_s: float
    speedup: float
    bitwise_equal: bool


def _time_call(fn, args, repeat: int) -> tuple[float, tuple]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def _radial_args(cfg: SimulationConfig) -> tuple:
    bub = WindowedBubble(cfg)
    return (*bub._args, cfg.params.R0, 0.0, 0.0, cfg.T,
            cfg.lam, cfg.dt_min, cfg.dt_max, cfg.r_floor,
            _kernels.DRIVE_SINE, cfg.A, cfg.f, 0.0, 1.0,
            np.zeros(2, dtype=np.float64), cfg.max_steps, 1)


def _volume_args(cfg: SimulationConfig) -> tuple:
    bub = WindowedBubble(cfg)
    v, vt, a = bub._state
    return (*bub._args, v, vt, a, 0.0, cfg.T,
            cfg.lam, cfg.dt_min, cfg.dt_max, cfg.r_floor,
            _kernels.DRIVE_SINE, cfg.A, cfg.f, 0.0, 1.0,
            np.zeros(2, dtype=np.float64), cfg.max_steps, 1)


def _compare(res_a: tuple, res_b: tuple) -> bool:
    n = res_a[3]
    if n != res_b[3]:
        return False
    for col in range(3):
        if not np.array_equal(res_a[col][:n], res_b[col][:n]):
            return False
    return all(a == b for a, b in zip(res_a[4:], res_b[4:]))


def run_benchmark(repeat: int = 3) -> list[BenchRow]:
    backend = _kernels.backend_name()
    _kernels.warmup()
    rows = []

    radial_cfg = apply_overrides(SimulationConfig(), {
        "model": "rpnnp", "A": "5e5", "f": "5e5", "T": "2e-6",
    })
    volume_cfg = apply_overrides(SimulationConfig(), {
        "model": "linear_volume", "delta": "1e-3", "A": "1e4", "f": "5e5",
        "T": "4e-7",
    })
    jobs = (
        ("radial_rpnnp", _kernels.integrate_radial,
         _radial_args(radial_cfg)),
        ("linear_volume", _kernels.integrate_volume,
         _volume_args(volume_cfg)),
    )
    for name, kernel, args in jobs:
        plain = _kernels.python_impl(kernel)
        compiled_s, res_c = _time_call(kernel, args, repeat)
        python_s, res_p = _time_call(plain, args, max(1, repeat // 3))
        rows.append(BenchRow(
            name=name,
            backend=backend,
            n_steps=int(res_c[4]),
            compiled_s=compiled_s,
            python_s=python_s,
            speedup=python_s / compiled_s if compiled_s > 0 else float("inf"),
            bitwise_equal=_compare(res_c, res_p),
        ))
    return rows
