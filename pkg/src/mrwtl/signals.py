"""Bundled synthetic test signals (deterministic; also shipped as CSV under ``data/``)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .multirate import Signal

__all__ = ["ramp", "ar1", "piecewise", "SYNTHETIC", "load_signal", "bundled_path"]

DEFAULT_LENGTH = 3000


def ramp(n: int = DEFAULT_LENGTH) -> np.ndarray:
    """``x[n] = n``."""
    return np.arange(n, dtype=float)


def ar1(n: int = DEFAULT_LENGTH, rho: float = 0.95, seed: int = 1) -> np.ndarray:
    """Stationary AR(1) process with unit innovation variance."""
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1.0 - rho * rho)
    for i in range(1, n):
        x[i] = rho * x[i - 1] + e[i]
    return x


def piecewise(n: int = DEFAULT_LENGTH, seed: int = 7) -> np.ndarray:
    """Piecewise quadratic segments plus a slow sinusoid, on ``t = i / n``.

    The shape does not depend on ``n`` beyond sampling density; the peak is
    positive so PSNR is defined.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n) / n
    breaks = np.array([0.0, 0.18, 0.41, 0.63, 0.82, 1.0])
    x = np.zeros(n)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        sel = (t >= lo) & (t < hi)
        c0, c1, c2 = rng.uniform(-1.0, 1.0, 3)
        u = t[sel] - lo
        x[sel] = c0 + 3.0 * c1 * u + 8.0 * c2 * u * u
    x += 0.4 * np.sin(2 * np.pi * 6 * t)
    return x - x.min() + 0.5


SYNTHETIC = {"ramp": ramp, "ar1": ar1, "piecewise": piecewise}


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("mrwtl") / "data" / f"{name}.csv"))


def load_signal(source: str, length: int | None = None) -> Signal:
    """A bundled name (``ramp``, ``ar1``, ``piecewise``) or a CSV/WAV path."""
    if source in SYNTHETIC:
        return Signal(SYNTHETIC[source](length or DEFAULT_LENGTH))
    from .io import read_signal

    sig = read_signal(source)
    if length is not None:
        sig = Signal(sig.samples[:length], sig.origin, sig.sample_rate_hz)
    return sig
