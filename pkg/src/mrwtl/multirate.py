"""Signals, Laurent-polynomial filters and the basic multirate operators.

Conventions
-----------
A :class:`LaurentFilter` stores ``coeffs[i]`` as the coefficient of
``z**(min_exp + i)``.  Filtering a signal by ``z**e`` *advances* it by ``e``
samples, i.e. ``(z**e x)[n] = x[n + e]``, so ``z**-1`` is the usual unit delay.

A :class:`Signal` is a finite window of an infinite sequence that is zero
outside ``[origin, origin + len)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Signal",
    "LaurentFilter",
    "RationalRate",
    "upsample",
    "downsample",
    "convolve",
    "laurent_scale_z",
    "equivalent_decimated_filter",
    "eval_at",
]


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Finite real sequence placed at integer index ``origin``."""

    samples: np.ndarray
    origin: int = 0
    sample_rate_hz: float | None = None

    def __post_init__(self):
        arr = _frozen_array(self.samples)
        if not np.all(np.isfinite(arr)):
            raise ValueError("signal samples must be finite")
        if self.sample_rate_hz is not None and not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "origin", int(self.origin))

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signal):
            return NotImplemented
        return self.origin == other.origin and np.array_equal(self.samples, other.samples)

    def __repr__(self) -> str:
        return f"Signal({self.samples.tolist()!r}, origin={self.origin})"

    @property
    def end(self) -> int:
        """One past the last stored index."""
        return self.origin + self.samples.size

    def window(self, start: int, stop: int) -> np.ndarray:
        """Return samples ``x[start:stop]`` with zero extension."""
        out = np.zeros(max(stop - start, 0))
        lo, hi = max(start, self.origin), min(stop, self.end)
        if hi > lo:
            out[lo - start:hi - start] = self.samples[lo - self.origin:hi - self.origin]
        return out

    def at(self, n: int) -> float:
        if self.origin <= n < self.end:
            return float(self.samples[n - self.origin])
        return 0.0


@dataclass(frozen=True, eq=False)
class LaurentFilter:
    """FIR filter as a Laurent polynomial in ``z`` with signed exponents.

    Only structural zeros at either end are trimmed; tiny learned
    coefficients are kept as they are.
    """

    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    min_exp: int = 0

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("filter coefficients must be finite")
        nz = np.flatnonzero(arr)
        if nz.size == 0:
            arr, lo = arr[:0], 0
        else:
            lo = int(self.min_exp) + int(nz[0])
            arr = arr[nz[0]:nz[-1] + 1]
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "min_exp", lo)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "LaurentFilter":
        return cls()

    @classmethod
    def monomial(cls, exponent: int, coeff: float = 1.0) -> "LaurentFilter":
        return cls([coeff], exponent)

    @classmethod
    def from_terms(cls, terms: Mapping[int, float]) -> "LaurentFilter":
        """Build from an ``{exponent: coefficient}`` mapping (duplicates not allowed)."""
        if not terms:
            return cls()
        lo, hi = min(terms), max(terms)
        arr = np.zeros(hi - lo + 1)
        for e, c in terms.items():
            arr[e - lo] += c
        return cls(arr, lo)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "LaurentFilter":
        """Build from ``(exponent, coefficient)`` pairs, summing repeats."""
        acc: dict[int, float] = {}
        for e, c in pairs:
            acc[int(e)] = acc.get(int(e), 0.0) + float(c)
        return cls.from_terms(acc)

    # -- inspection ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def max_exp(self) -> int:
        return self.min_exp + self.coeffs.size - 1

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.min_exp, self.min_exp + self.coeffs.size)

    def terms(self) -> dict[int, float]:
        """Nonzero terms as ``{exponent: coefficient}``."""
        return {int(e): float(c) for e, c in zip(self.exponents, self.coeffs) if c != 0.0}

    def coeff(self, exponent: int) -> float:
        i = exponent - self.min_exp
        if 0 <= i < self.coeffs.size:
            return float(self.coeffs[i])
        return 0.0

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients for exponents ``lo..hi`` inclusive, zero padded."""
        out = np.zeros(hi - lo + 1)
        if self.is_zero:
            return out
        a, b = max(lo, self.min_exp), min(hi, self.max_exp)
        if b >= a:
            out[a - lo:b - lo + 1] = self.coeffs[a - self.min_exp:b - self.min_exp + 1]
        return out

    def energy(self) -> float:
        return float(np.dot(self.coeffs, self.coeffs))

    def allclose(self, other: "LaurentFilter", atol: float = 1e-12) -> bool:
        if self.is_zero and other.is_zero:
            return True
        lo = min(e.min_exp for e in (self, other) if not e.is_zero)
        hi = max(e.max_exp for e in (self, other) if not e.is_zero)
        return bool(np.allclose(self.dense(lo, hi), other.dense(lo, hi), rtol=0.0, atol=atol))

    # -- arithmetic ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentFilter):
            return NotImplemented
        return self.min_exp == other.min_exp and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.min_exp, self.coeffs.tobytes()))

    def __add__(self, other: "LaurentFilter") -> "LaurentFilter":
        if not isinstance(other, LaurentFilter):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo, hi = min(self.min_exp, other.min_exp), max(self.max_exp, other.max_exp)
        return LaurentFilter(self.dense(lo, hi) + other.dense(lo, hi), lo)

    def __neg__(self) -> "LaurentFilter":
        return LaurentFilter(-self.coeffs, self.min_exp)

    def __sub__(self, other: "LaurentFilter") -> "LaurentFilter":
        return self + (-other)

    def __mul__(self, other) -> "LaurentFilter":
        if isinstance(other, LaurentFilter):
            if self.is_zero or other.is_zero:
                return LaurentFilter()
            return LaurentFilter(np.convolve(self.coeffs, other.coeffs), self.min_exp + other.min_exp)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return LaurentFilter(self.coeffs * float(other), self.min_exp)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "LaurentFilter":
        return LaurentFilter(self.coeffs / float(scalar), self.min_exp)

    def shift(self, k: int) -> "LaurentFilter":
        """Multiply by ``z**k``."""
        return LaurentFilter(self.coeffs, self.min_exp + k)

    def reversed(self) -> "LaurentFilter":
        """Return ``h(1/z)``."""
        if self.is_zero:
            return self
        return LaurentFilter(self.coeffs[::-1], -self.max_exp)

    def __repr__(self) -> str:
        if self.is_zero:
            return "LaurentFilter(0)"
        parts = [f"{c:+.6g}*z^{e}" for e, c in self.terms().items()]
        return "LaurentFilter(" + " ".join(parts) + ")"

    def to_dict(self) -> dict:
        return {"min_exp": self.min_exp, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "LaurentFilter":
        return cls(d["coeffs"], d["min_exp"])


@dataclass(frozen=True)
class RationalRate:
    """Branch rates ``q1/m`` (lowpass) and ``q2/m`` (highpass) of a 2-band RFB."""

    q1: int
    q2: int
    m: int

    def __post_init__(self):
        for name in ("q1", "q2", "m"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.q1 + self.q2 != self.m:
            raise ValueError(f"not critically sampled: {self.q1} + {self.q2} != {self.m}")
        if math.gcd(self.q1, self.q2) != 1:
            raise ValueError(f"q1={self.q1} and q2={self.q2} must be coprime")

    @classmethod
    def from_q1(cls, q1: int, m: int) -> "RationalRate":
        return cls(q1, m - q1, m)

    @classmethod
    def parse(cls, text: str) -> "RationalRate":
        """Parse ``"q1/M"`` (e.g. ``"2/3"``); ``q2 = M - q1``."""
        try:
            num, den = text.strip().split("/")
            return cls.from_q1(int(num), int(den))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"invalid rate {text!r}: expected 'q1/M' with coprime q1, M") from exc

    @property
    def k_p(self) -> float:
        return self.q1 / self.q2

    @property
    def k_u(self) -> float:
        return self.q2 / self.q1

    def __str__(self) -> str:
        return f"{self.q1}/{self.m}"

    def to_dict(self) -> dict:
        return {"q1": self.q1, "q2": self.q2, "m": self.m}


def upsample(x: Signal, q: int) -> Signal:
    """Insert ``q - 1`` zeros between samples; ``y[q n] = x[n]``."""
    if q < 1:
        raise ValueError("upsampling factor must be >= 1")
    if q == 1 or len(x) == 0:
        return Signal(x.samples, x.origin * q, x.sample_rate_hz)
    out = np.zeros(q * (len(x) - 1) + 1)
    out[::q] = x.samples
    rate = None if x.sample_rate_hz is None else x.sample_rate_hz * q
    return Signal(out, x.origin * q, rate)


def downsample(x: Signal, p: int, phase: int = 0) -> Signal:
    """Keep every ``p``-th sample: ``y[n] = x[p n + phase]``."""
    if p < 1:
        raise ValueError("downsampling factor must be >= 1")
    if not 0 <= phase < p:
        raise ValueError("phase must satisfy 0 <= phase < p")
    rate = None if x.sample_rate_hz is None else x.sample_rate_hz / p
    if len(x) == 0:
        return Signal([], -(-(x.origin - phase) // p), rate)
    first = -(-(x.origin - phase) // p)
    last = (x.end - 1 - phase) // p
    if last < first:
        return Signal([], first, rate)
    idx = p * np.arange(first, last + 1) + phase - x.origin
    return Signal(x.samples[idx], first, rate)


def convolve(x: Signal, h: LaurentFilter) -> Signal:
    """Filter ``x`` by ``h``: ``y[n] = sum_e h_e x[n + e]`` (full support)."""
    if h.is_zero or len(x) == 0:
        return Signal([], x.origin, x.sample_rate_hz)
    y = np.convolve(x.samples, h.coeffs[::-1])
    return Signal(y, x.origin - h.max_exp, x.sample_rate_hz)


def laurent_scale_z(h: LaurentFilter, q: int) -> LaurentFilter:
    """Substitute ``z -> z**q``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if q == 1 or h.is_zero:
        return h
    arr = np.zeros(q * (h.coeffs.size - 1) + 1)
    arr[::q] = h.coeffs
    return LaurentFilter(arr, q * h.min_exp)


def equivalent_decimated_filter(h: LaurentFilter, m: int) -> LaurentFilter:
    """Filter equivalent to ``upsample by m -> h -> downsample by m``.

    Keeps the taps whose exponent is a multiple of ``m`` and divides the
    exponent by ``m``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1 or h.is_zero:
        return h
    first = -(-h.min_exp // m)
    last = h.max_exp // m
    if last < first:
        return LaurentFilter()
    idx = m * np.arange(first, last + 1) - h.min_exp
    return LaurentFilter(h.coeffs[idx], first)


def eval_at(h: LaurentFilter, z: complex) -> complex:
    """Evaluate ``sum_i coeffs[i] * z**(min_exp + i)``."""
    if h.is_zero:
        return 0j
    z = complex(z)
    if z == 0:
        if h.min_exp < 0:
            raise ValueError("cannot evaluate negative powers of z at z = 0")
        return complex(h.coeff(0))
    # Horner in z on the shifted polynomial, then apply z**min_exp
    acc = 0j
    for c in h.coeffs[::-1]:
        acc = acc * z + c
    return acc * z ** h.min_exp


def eval_on_grid(h: LaurentFilter, z: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Vectorized :func:`eval_at` over an array of nonzero points."""
    z = np.asarray(z, dtype=complex)
    if h.is_zero:
        return np.zeros_like(z)
    powers = z[..., None] ** h.exponents
    return powers @ h.coeffs


def principal_root(z: complex, m: int) -> complex:
    """Principal ``m``-th root, used by the aliasing-sum oracles."""
    return cmath.rect(abs(z) ** (1.0 / m), cmath.phase(z) / m)
