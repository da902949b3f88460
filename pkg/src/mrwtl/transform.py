"""Forward/inverse rational wavelet transforms and fixed baseline banks.

Transforms run each analysis branch on the zero-padded input with *periodic*
extension (circular filtering over one padded period).  That keeps the
subbands critically sampled while a PR-certified bank reconstructs exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch
from .lazy import SubbandSignals, n_blocks_for, rational_lazy
from .lifting import PredictStep, UpdateStep, update_bank_predict, update_bank_update
from .multirate import LaurentFilter, RationalRate, Signal, eval_on_grid
from .polyphase import PRCertificate, RationalFilterBank, certify

__all__ = [
    "CoeffPyramid",
    "analyze",
    "synthesize",
    "analyze_multilevel",
    "synthesize_multilevel",
    "synthesis_adjoint_multilevel",
    "pyramid_layout",
    "standard_bank",
    "STANDARD_BANKS",
    "frequency_response",
]


def _circular_filter(u: np.ndarray, h: LaurentFilter) -> np.ndarray:
    # y[n] = sum_e h_e u[(n + e) mod P] along the last axis
    out = np.zeros_like(u)
    for e, c in h.terms().items():
        out += c * np.roll(u, -e, axis=-1)
    return out


def _up(u: np.ndarray, q: int) -> np.ndarray:
    if q == 1:
        return u
    out = np.zeros(u.shape[:-1] + (u.shape[-1] * q,))
    out[..., ::q] = u
    return out


def _analysis_branch(x: np.ndarray, g: LaurentFilter, q: int, m: int) -> np.ndarray:
    return _circular_filter(_up(x, q), g)[..., ::m]


def _synthesis_branch(v: np.ndarray, f: LaurentFilter, q: int, m: int) -> np.ndarray:
    return _circular_filter(_up(v, m), f)[..., ::q]


def _analyze_array(x: np.ndarray, fb: RationalFilterBank) -> tuple[np.ndarray, np.ndarray]:
    """Both branches on an already padded ``(..., L*M)`` array."""
    r = fb.rate
    return (
        _analysis_branch(x, fb.g_l, r.q1, r.m),
        _analysis_branch(x, fb.g_h, r.q2, r.m),
    )


def _synthesize_array(
    a: np.ndarray,
    d: np.ndarray,
    fb: RationalFilterBank,
    cert: PRCertificate | None,
) -> np.ndarray:
    r = fb.rate
    y = _synthesis_branch(a, fb.f_l, r.q1, r.m) + _synthesis_branch(d, fb.f_h, r.q2, r.m)
    if cert is not None:
        # y[n] = c x[n - M n0]
        y = np.roll(y, -r.m * cert.n0, axis=-1) / cert.c
    return y


def _pad(x: np.ndarray, m: int) -> tuple[np.ndarray, int]:
    n = x.shape[-1]
    L = n_blocks_for(n, m)
    if L * m == n:
        return x, L
    out = np.zeros(x.shape[:-1] + (L * m,))
    out[..., :n] = x
    return out, L


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)


def analyze(x: Signal | np.ndarray, fb: RationalFilterBank) -> SubbandSignals:
    """One level of the 2-band rational analysis: ``down_M(G_i up_qi(x))``.

    With the rational Lazy bank this is exactly :func:`mrwtl.lazy.block_split`.
    """
    xs = _samples(x)
    n = xs.size
    xp, L = _pad(xs, fb.rate.m)
    a, d = _analyze_array(xp, fb)
    return SubbandSignals(Signal(a), Signal(d), fb.rate, L, n)


def synthesize(
    ss: SubbandSignals,
    fb: RationalFilterBank,
    certificate: PRCertificate | None = None,
    normalize: bool = True,
) -> Signal:
    """Invert :func:`analyze`.

    The raw two-branch output equals ``c x[n - M n0]``; with ``normalize``
    (the default) the certificate's scale and delay are undone and the
    result is truncated to the original length.
    """
    ss.check()
    if ss.rate != fb.rate:
        raise LengthMismatch("subbands and bank use different rates")
    cert = None
    if normalize:
        cert = certificate if certificate is not None else certify(fb)
    y = _synthesize_array(ss.approx.samples, ss.detail.samples, fb, cert)
    return Signal(y[:ss.orig_len] if normalize else y)


@dataclass
class CoeffPyramid:
    """Multi-level coefficients; ``details[0]`` is the finest level."""

    rate: RationalRate
    details: list[np.ndarray]
    approx: np.ndarray
    lengths: list[int] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.details)

    def padded_lengths(self) -> list[int]:
        return [n_blocks_for(n, self.rate.m) * self.rate.m for n in self.lengths]

    def band_sizes(self) -> list[int]:
        """Sizes of the flattened bands: approx, then details coarsest to finest."""
        return [self.approx.shape[-1]] + [d.shape[-1] for d in reversed(self.details)]

    def count(self) -> int:
        return sum(self.band_sizes())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.approx] + list(reversed(self.details)), axis=-1)

    def with_vector(self, vec: np.ndarray) -> "CoeffPyramid":
        """Same layout, new coefficient values (leading batch axes allowed)."""
        vec = np.asarray(vec, dtype=float)
        sizes = self.band_sizes()
        if vec.shape[-1] != sum(sizes):
            raise LengthMismatch(f"expected {sum(sizes)} coefficients, got {vec.shape[-1]}")
        parts = np.split(vec, np.cumsum(sizes)[:-1], axis=-1)
        return CoeffPyramid(self.rate, list(reversed(parts[1:])), parts[0], list(self.lengths))


def pyramid_layout(n: int, rate: RationalRate, levels: int) -> CoeffPyramid:
    """Empty pyramid with the band sizes that ``analyze_multilevel`` produces."""
    lengths, details = [], []
    cur = n
    for _ in range(levels):
        L = n_blocks_for(cur, rate.m)
        lengths.append(cur)
        details.append(np.zeros(L * rate.q2))
        cur = L * rate.q1
    return CoeffPyramid(rate, details, np.zeros(cur), lengths)


def analyze_multilevel(x: Signal | np.ndarray, fb: RationalFilterBank, levels: int) -> CoeffPyramid:
    """Iterate :func:`analyze` on the lowpass branch ``levels`` times."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    cur = _samples(x)
    details, lengths = [], []
    for _ in range(levels):
        lengths.append(cur.shape[-1])
        xp, _ = _pad(cur, fb.rate.m)
        cur, d = _analyze_array(xp, fb)
        details.append(d)
    return CoeffPyramid(fb.rate, details, cur, lengths)


def synthesize_multilevel(
    p: CoeffPyramid,
    fb: RationalFilterBank,
    certificate: PRCertificate | None = None,
) -> Signal | np.ndarray:
    """Invert :func:`analyze_multilevel`; batched pyramids return an array."""
    if p.rate != fb.rate:
        raise LengthMismatch("pyramid and bank use different rates")
    cert = certificate if certificate is not None else certify(fb)
    q1, q2, m = fb.rate.q1, fb.rate.q2, fb.rate.m
    cur = p.approx
    for lvl in reversed(range(p.levels)):
        d = p.details[lvl]
        n = p.lengths[lvl]
        L = n_blocks_for(n, m)
        if cur.shape[-1] != L * q1 or d.shape[-1] != L * q2:
            raise LengthMismatch(f"level {lvl + 1}: band sizes do not match recorded length {n}")
        cur = _synthesize_array(cur, d, fb, cert)[..., :n]
    return Signal(cur) if cur.ndim == 1 else cur


def synthesis_adjoint_multilevel(
    x: np.ndarray,
    fb: RationalFilterBank,
    layout: CoeffPyramid,
    certificate: PRCertificate | None = None,
) -> CoeffPyramid:
    """Exact adjoint of :func:`synthesize_multilevel` for the given layout.

    Each synthesis branch ``down_q(F up_M(.))`` has adjoint
    ``down_M(F(1/z) up_q(.))``, i.e. an analysis branch with the
    time-reversed synthesis filter.
    """
    cert = certificate if certificate is not None else certify(fb)
    q1, q2, m = fb.rate.q1, fb.rate.q2, fb.rate.m
    rev_l, rev_h = fb.f_l.reversed(), fb.f_h.reversed()
    cur = np.asarray(x, dtype=float)
    details = [None] * layout.levels
    for lvl in range(layout.levels):
        n = layout.lengths[lvl]
        if cur.shape[-1] != n:
            raise LengthMismatch(f"level {lvl + 1}: expected {n} samples, got {cur.shape[-1]}")
        yp, _ = _pad(cur, m)
        yp = np.roll(yp, m * cert.n0, axis=-1) / cert.c
        cur = _analysis_branch(yp, rev_l, q1, m)
        details[lvl] = _analysis_branch(yp, rev_h, q2, m)
    return CoeffPyramid(fb.rate, details, cur, list(layout.lengths))


# -- baseline banks -----------------------------------------------------------

_SQRT3 = math.sqrt(3.0)
_DB2 = np.array([1 + _SQRT3, 3 + _SQRT3, 3 - _SQRT3, 1 - _SQRT3]) / (4 * math.sqrt(2.0))
# Daubechies 8-tap (4 vanishing moments) synthesis lowpass, published values.
_DB4 = np.array([
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
])
# CDF 9/7 lifting constants (Daubechies & Sweldens factorization).
_CDF97 = {
    "alpha": -1.586134342059924,
    "beta": -0.052980118572961,
    "gamma": 0.882911075530934,
    "delta": 0.443506852043971,
    "zeta": 1.149604398860241,
}

STANDARD_BANKS = ("db2", "db4", "bior5_3", "bior9_7")


def _orthogonal_bank(h: np.ndarray) -> RationalFilterBank:
    n = h.size
    g = np.array([(-1) ** k * h[n - 1 - k] for k in range(n)])
    # causal synthesis filters sum_k h[k] z^-k; analysis is the time reverse
    f_l = LaurentFilter(h[::-1], -(n - 1))
    f_h = LaurentFilter(g[::-1], -(n - 1))
    return RationalFilterBank(RationalRate(1, 1, 2), f_l.reversed(), f_h.reversed(), f_l, f_h)


def _lifted_dyadic(steps: list[tuple[str, float]], zeta: float | None = None) -> RationalFilterBank:
    rate = RationalRate(1, 1, 2)
    fb = rational_lazy(rate)
    for kind, coef in steps:
        if kind == "predict":
            fb = update_bank_predict(fb, PredictStep(rate, [coef, coef]))
        else:
            fb = update_bank_update(fb, UpdateStep(rate, [coef, coef]))
    if zeta is not None:
        fb = fb.replace(g_l=fb.g_l * zeta, f_l=fb.f_l / zeta, g_h=fb.g_h / zeta, f_h=fb.f_h * zeta)
    return fb


def standard_bank(name: str) -> RationalFilterBank:
    """A fixed dyadic baseline as a (1, 1, 2) rational bank."""
    if name == "db2":
        return _orthogonal_bank(_DB2)
    if name == "db4":
        return _orthogonal_bank(_DB4)
    if name == "bior5_3":
        return _lifted_dyadic([("predict", 0.5), ("update", 0.25)])
    if name == "bior9_7":
        k = _CDF97
        return _lifted_dyadic(
            [
                ("predict", -k["alpha"]),
                ("update", k["beta"]),
                ("predict", -k["gamma"]),
                ("update", k["delta"]),
            ],
            zeta=k["zeta"],
        )
    raise ValueError(f"unknown standard bank {name!r}; choose from {', '.join(STANDARD_BANKS)}")


def frequency_response(fb: RationalFilterBank, n_points: int = 512) -> dict[str, np.ndarray]:
    """Magnitude responses on ``n_points`` frequencies from 0 to pi (normalized 0..1)."""
    freq = np.linspace(0.0, 1.0, n_points)
    z = np.exp(1j * np.pi * freq)
    out = {"freq": freq}
    for key in ("g_l", "g_h", "f_l", "f_h"):
        out[key] = np.abs(eval_on_grid(getattr(fb, key), z))
    return out
