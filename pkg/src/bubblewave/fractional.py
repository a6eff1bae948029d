"""Caputo-type fractional calculus on uniform time grids.

The derivative of order ``alpha`` in (0, 1) is discretized with the L1
scheme: with weights ``b_j = (j+1)^(1-alpha) - j^(1-alpha)``,

    D^alpha f(t_n) ~= dt^(-alpha)/Gamma(2-alpha) *
                      sum_j b_j (f(t_{n-j}) - f(t_{n-j-1}))

accurate to O(dt^(2-alpha)) for smooth f. The fractional integral I^y uses
product quadrature: the convolution kernel is integrated exactly against a
piecewise-constant (left endpoint) or piecewise-linear interpolant of f.
"""

from __future__ import annotations

import math

import numpy as np


def l1_weights(alpha: float, n: int) -> np.ndarray:
    """First n L1 weights b_j = (j+1)^(1-alpha) - j^(1-alpha), j = 0..n-1.

    Positive, strictly decreasing, telescoping to sum = n^(1-alpha).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"l1_weights requires 0 < alpha < 1, got {alpha}")
    if n < 0:
        raise ValueError("n must be >= 0")
    j = np.arange(n + 1, dtype=float)
    powers = j ** (1.0 - alpha)
    return powers[1:] - powers[:-1]


def l1_scale(alpha: float, dt: float) -> float:
    """Prefactor dt^(-alpha)/Gamma(2-alpha) of the L1 sum."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return dt ** (-alpha) / math.gamma(2.0 - alpha)


def caputo_derivative(values: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    """L1 Caputo derivative of sampled f at every grid point (0 at t_0).

    *values* may be 1D (a scalar signal) or 2D with time as axis 0.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    if n < 0:
        raise ValueError("need at least one sample")
    out = np.zeros_like(values)
    if n == 0:
        return out
    w = l1_weights(alpha, n)
    scale = l1_scale(alpha, dt)
    diffs = values[1:] - values[:-1]
    for i in range(1, n + 1):
        # weight b_j pairs with difference d[i-1-j]
        out[i] = scale * np.tensordot(w[:i], diffs[i - 1::-1], axes=(0, 0))
    return out


def fractional_integral(values: np.ndarray, dt: float, y: float,
                        rule: str = "left") -> float:
    """Riemann-Liouville integral I^y f at the final grid time."""
    series = fractional_integral_series(values, dt, y, rule)
    return float(series[-1]) if series.ndim == 1 else series[-1]


def fractional_integral_series(values: np.ndarray, dt: float, y: float,
                               rule: str = "left") -> np.ndarray:
    """I^y f at every grid point t_i (0 at t_0).

    rule "left": kernel integrated against piecewise-constant f (left value);
    rule "trapezoid": against the piecewise-linear interpolant.
    """
    if y <= 0:
        raise ValueError(f"integral order must be positive, got {y}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if rule not in ("left", "trapezoid"):
        raise ValueError(f"unknown quadrature rule {rule!r}")
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    out = np.zeros_like(values)
    if n <= 0:
        return out
    dty = dt ** y
    inv_gamma = 1.0 / math.gamma(y)
    m = np.arange(n + 1, dtype=float)
    pow_y = m ** y
    pow_y1 = m ** (y + 1.0)
    for i in range(1, n + 1):
        # interval j spans [t_j, t_{j+1}]; kernel argument b = i-j, a = i-j-1
        j = np.arange(i)
        b = pow_y[i - j]
        a = pow_y[i - j - 1]
        if rule == "left":
            weights = (b - a) / y
            out[i] = inv_gamma * dty * np.tensordot(weights, values[:i], axes=(0, 0))
        else:
            i1 = (b - a) / y
            i2 = (pow_y1[i - j] - pow_y1[i - j - 1]) / (y + 1.0)
            w_lo = i2 - (i - j - 1) * i1
            w_hi = (i - j) * i1 - i2
            out[i] = inv_gamma * dty * (
                np.tensordot(w_lo, values[:i], axes=(0, 0))
                + np.tensordot(w_hi, values[1:i + 1], axes=(0, 0)))
    return out


class FractionalHistory:
    """Incremental state for evaluating D^alpha of a nodal time series.

    Stores first differences of appended states; ``memory_sum()`` returns
    the lagged part sum_{j>=1} b_j (f_{n+1-j} - f_{n-j}) of the L1 sum at
    the next time level, leaving only the b_0 (f_{n+1} - f_n) term to the
    caller (which knows the current iterate).
    """

    def __init__(self, alpha: float, dt: float, shape: tuple[int, ...] = ()):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"FractionalHistory requires 0 < alpha < 1, got {alpha}")
        self.alpha = float(alpha)
        self.dt = float(dt)
        self.scale = l1_scale(alpha, dt)
        self.shape = tuple(shape)
        self._last: np.ndarray | None = None
        self._cap = 256
        self._n = 0
        self._diffs = np.zeros((self._cap,) + self.shape, dtype=float)
        self._weights = l1_weights(alpha, self._cap + 1)

    def __len__(self) -> int:
        return self._n + (1 if self._last is not None else 0)

    @property
    def b0(self) -> float:
        return 1.0  # (0+1)^(1-alpha) - 0^(1-alpha)

    def push(self, state: np.ndarray) -> None:
        state = np.array(state, dtype=float, copy=True)
        if state.shape != self.shape:
            raise ValueError(f"state shape {state.shape} != history shape {self.shape}")
        if self._last is not None:
            if self._n == self._cap:
                self._cap *= 2
                grown = np.zeros((self._cap,) + self.shape, dtype=float)
                grown[:self._n] = self._diffs[:self._n]
                self._diffs = grown
                self._weights = l1_weights(self.alpha, self._cap + 1)
            self._diffs[self._n] = state - self._last
            self._n += 1
        self._last = state

    @property
    def last(self) -> np.ndarray:
        if self._last is None:
            raise ValueError("history is empty")
        return self._last

    def memory_sum(self) -> np.ndarray:
        """Lagged L1 part (already multiplied by the dt^-alpha/Gamma scale)."""
        n = self._n
        if n == 0:
            return np.zeros(self.shape, dtype=float)
        w = self._weights[1:n + 1]
        acc = np.tensordot(w, self._diffs[n - 1::-1], axes=(0, 0))
        return self.scale * acc

    def derivative(self, current: np.ndarray) -> np.ndarray:
        """Full L1 value of D^alpha at the next level given its state."""
        current = np.asarray(current, dtype=float)
        return self.scale * self.b0 * (current - self.last) + self.memory_sum()
