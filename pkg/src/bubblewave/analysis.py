"""Spectral and convergence analysis of solver outputs.

Spectra are one-sided magnitudes of the mean-removed (optionally Hann
windowed) signal, normalized by series length, so only relative comparisons
across runs are meaningful. Harmonic metrics search within one bin of each
target frequency. Convergence orders come from a least-squares fit of
log(error) against log(step).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ode import BubbleTrajectory, UniformSeries, resample_uniform


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum on uniform frequency bins."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    window: str
    fundamental_bin: int = 0

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


def fft_spectrum(series: UniformSeries, window: str = "none",
                 f_drive: float | None = None) -> Spectrum:
    """One-sided FFT magnitudes of the mean-removed series.

    *window* is "none" or "hann". With *f_drive* given, the fundamental bin
    index is recorded on the result.
    """
    x = np.asarray(series.values, dtype=float)
    n = x.size
    if n < 8:
        raise ValueError(f"series too short for a spectrum: {n} < 8 samples")
    if window not in ("none", "hann"):
        raise ValueError(f"unknown window {window!r}; use 'none' or 'hann'")
    x = x - x.mean()
    if window == "hann":
        x = x * np.hanning(n)
    mags = np.abs(np.fft.rfft(x)) / n
    freqs = np.fft.rfftfreq(n, series.dt)
    fundamental = 0
    if f_drive is not None:
        fundamental = int(round(f_drive * n * series.dt))
        if not 0 <= fundamental < freqs.size:
            raise ValueError(f"drive frequency {f_drive:g} Hz outside the "
                             f"spectral range [0, {freqs[-1]:g}] Hz")
    return Spectrum(frequencies=freqs, magnitudes=mags, window=window,
                    fundamental_bin=fundamental)


@dataclass(frozen=True)
class HarmonicMetrics:
    """Peak magnitudes near the drive line and its multiples."""

    fundamental: float
    harmonics: tuple[float, ...]   # 2f .. 5f
    subharmonic: float             # f/2
    thd: float


def _peak_near(spec: Spectrum, target_bin: float) -> float:
    lo = max(0, int(math.floor(target_bin)) - 1)
    hi = min(spec.magnitudes.size, int(math.ceil(target_bin)) + 2)
    if lo >= hi:
        return 0.0
    return float(spec.magnitudes[lo:hi].max())


def harmonic_metrics(spec: Spectrum, f_drive: float) -> HarmonicMetrics:
    """Fundamental, 2f..5f, f/2 peak magnitudes (each within +-1 bin) and
    total harmonic distortion sqrt(sum harmonics^2)/fundamental."""
    df = spec.bin_width
    base = f_drive / df
    if not 0 < base < spec.magnitudes.size - 1:
        raise ValueError(f"drive frequency {f_drive:g} Hz outside the "
                         f"spectral range of {spec.frequencies[-1]:g} Hz")
    fundamental = _peak_near(spec, base)
    harmonics = tuple(_peak_near(spec, m * base) for m in range(2, 6))
    subharmonic = _peak_near(spec, 0.5 * base)
    thd = math.sqrt(sum(h * h for h in harmonics)) / fundamental \
        if fundamental > 0 else math.inf
    return HarmonicMetrics(fundamental=fundamental, harmonics=harmonics,
                           subharmonic=subharmonic, thd=thd)


def bubble_spectrum(traj: BubbleTrajectory, f_drive: float,
                    periods: int = 10, n: int = 2 ** 14,
                    window: str = "hann") -> Spectrum:
    """Spectrum of R(t) over the last *periods* drive cycles, resampled to
    *n* uniform points."""
    t_last = float(traj.times[-1])
    t_first = max(float(traj.times[0]), t_last - periods / f_drive)
    series = resample_uniform(traj.times, traj.radii, n, t_first, t_last)
    return fft_spectrum(series, window=window, f_drive=f_drive)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Errors against step sizes with the fitted observed order."""

    dts: tuple[float, ...]
    errors: tuple[float, ...]
    order: float
    monotone: bool


def fit_order(dts, errors) -> ConvergenceStudy:
    """Least-squares slope of log(error) vs log(dt); non-monotone error
    sequences are flagged (and warned about) but still fitted."""
    dts = tuple(float(d) for d in dts)
    errors = tuple(float(e) for e in errors)
    if len(dts) < 3 or len(dts) != len(errors):
        raise ValueError("need at least 3 (dt, error) pairs")
    if any(d2 >= d1 for d1, d2 in zip(dts, dts[1:])):
        raise ValueError("step sizes must decrease")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive to fit an order")
    monotone = all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    if not monotone:
        warnings.warn("error sequence is not monotone; order estimate is "
                      "unreliable", stacklevel=2)
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    return ConvergenceStudy(dts=dts, errors=errors, order=float(slope),
                            monotone=monotone)


def convergence_order(runner, dts) -> ConvergenceStudy:
    """Run *runner(dt) -> error* over halving steps and fit the order."""
    dts = [float(d) for d in dts]
    if len(dts) < 3:
        raise ValueError("need at least 3 step sizes")
    for d1, d2 in zip(dts, dts[1:]):
        if not math.isclose(d1 / d2, 2.0, rel_tol=0.05):
            raise ValueError(f"steps must halve: got {d1:g} -> {d2:g}")
    return fit_order(dts, [runner(d) for d in dts])


def waveform_skewness(series: UniformSeries, f_drive: float) -> tuple[float, float]:
    """Asymmetry of an oscillating trace: (max/|min|, normalized max slope).

    The slope is max|dp/dt| divided by amplitude*2*pi*f_drive, so a pure
    sinusoid at f_drive scores (1, 1).
    """
    x = np.asarray(series.values, dtype=float)
    hi = float(x.max())
    lo = float(x.min())
    if hi == lo:
        raise ValueError("constant trace has no waveform shape")
    if lo >= 0.0:
        raise ValueError("trace must swing negative for the peak ratio")
    amplitude = 0.5 * (hi - lo)
    slope = float(np.max(np.abs(np.gradient(x, series.dt))))
    return hi / abs(lo), slope / (amplitude * 2.0 * math.pi * f_drive)


def slope_crest(series: UniformSeries) -> float:
    """Peak-to-mean ratio of |dp/dt|: the max slope normalized by the trace's
    own mean slope magnitude.

    A symmetric sinusoid scores pi/2; a waveform whose rise is steeper than
    its fall (or that carries localized steep fronts) scores higher.
    """
    g = np.abs(np.gradient(np.asarray(series.values, dtype=float), series.dt))
    mean = float(g.mean())
    if mean == 0.0:
        raise ValueError("constant trace has no slope scale")
    return float(g.max()) / mean


def write_spectrum_csv(path, spec: Spectrum) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("f,magnitude\n")
        for f, m in zip(spec.frequencies, spec.magnitudes):
            handle.write(f"{f:.17e},{m:.17e}\n")


def write_report(path, entries: dict) -> None:
    """Flat key = value report, one entry per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for key, value in entries.items():
            if isinstance(value, float):
                handle.write(f"{key} = {value:.12g}\n")
            else:
                handle.write(f"{key} = {value}\n")
