"""Rational lifting: predict/update rate converters, LS learning and bank updates.

The predict branch turns the lowpass stream ``a`` into an estimate of the
highpass stream ``d``::

    a -> (up q2) -> R_p(z) -> T(z) -> (down q1) -> a4,     d_new = d - a4

and the update branch feeds ``d_new`` back into ``a``::

    d_new -> (up q1) -> R_u(z) -> S(z) -> (down q2) -> d4,  a_new = a + d4

Both branches are folded into the filters in the time domain:
``G_h -= decimate_q1(G_l(z**q2) P(z**M))`` and
``G_l += decimate_q2(G_h(z**q1) U(z**M))`` with ``P = R_p T`` and ``U = R_u S``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import OddTapCount, TooShortSignal
from .lazy import block_split, n_blocks_for, rational_lazy
from .multirate import (
    LaurentFilter,
    RationalRate,
    Signal,
    convolve,
    downsample,
    equivalent_decimated_filter,
    laurent_scale_z,
    upsample,
)
from .polyphase import (
    MBandFilterBank,
    PRCertificate,
    RationalFilterBank,
    analysis_polyphase,
    certify,
    invert_fir,
    mband_to_rational,
    rational_to_mband,
    synthesis_filters,
)

log = logging.getLogger(__name__)

__all__ = [
    "PredictStep",
    "UpdateStep",
    "LiftingModel",
    "predict_template",
    "update_template",
    "composite_predict",
    "composite_update",
    "predict_system",
    "update_system",
    "learn_predict",
    "learn_update",
    "update_bank_predict",
    "update_bank_update",
    "learn_mrwtl",
    "branch_analysis",
]


def _check_taps(n: int) -> None:
    if n < 2 or n % 2:
        raise OddTapCount(f"tap count must be even and >= 2, got {n}")


def _ones(count: int) -> LaurentFilter:
    """``1 + z**-1 + ... + z**-(count-1)``."""
    return LaurentFilter(np.ones(count), -(count - 1))


def predict_template(rate: RationalRate, n_p: int) -> list[int]:
    """Exponents of ``T(z) = z**(q1 q2) z**(-n_p/2 q2) sum_k t[k] z**(k q2)``."""
    _check_taps(n_p)
    q1, q2 = rate.q1, rate.q2
    return [q1 * q2 - (n_p // 2) * q2 + k * q2 for k in range(n_p)]


def update_template(rate: RationalRate, n_s: int) -> list[int]:
    """Exponents of ``S(z) = z**((n_s/2 - 1) q1) sum_k s[k] z**(-k q1)``."""
    _check_taps(n_s)
    q1 = rate.q1
    return [(n_s // 2 - 1) * q1 - k * q1 for k in range(n_s)]


@dataclass(frozen=True)
class PredictStep:
    rate: RationalRate
    t: tuple[float, ...]
    residual_energy: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        _check_taps(len(self.t))

    @property
    def n_p(self) -> int:
        return len(self.t)

    @property
    def r_p(self) -> LaurentFilter:
        return _ones(self.rate.q2)

    @property
    def t_poly(self) -> LaurentFilter:
        return LaurentFilter.from_pairs(zip(predict_template(self.rate, self.n_p), self.t))

    @property
    def p_poly(self) -> LaurentFilter:
        """``P(z) = R_p(z) T(z)``."""
        return self.r_p * self.t_poly

    def to_dict(self) -> dict:
        return {"n_p": self.n_p, "t": list(self.t), "residual_energy": self.residual_energy}


@dataclass(frozen=True)
class UpdateStep:
    rate: RationalRate
    s: tuple[float, ...]
    residual_energy: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        _check_taps(len(self.s))

    @property
    def n_s(self) -> int:
        return len(self.s)

    @property
    def r_u(self) -> LaurentFilter:
        return _ones(self.rate.q1)

    @property
    def s_poly(self) -> LaurentFilter:
        return LaurentFilter.from_pairs(zip(update_template(self.rate, self.n_s), self.s))

    @property
    def u_poly(self) -> LaurentFilter:
        """``U(z) = R_u(z) S(z)``."""
        return self.r_u * self.s_poly

    def to_dict(self) -> dict:
        return {"n_s": self.n_s, "s": list(self.s), "residual_energy": self.residual_energy}


@dataclass(frozen=True)
class LiftingModel:
    rate: RationalRate
    predict: PredictStep
    update: UpdateStep
    bank: RationalFilterBank
    certificate: PRCertificate
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = self.bank.to_dict()
        out["certificate"] = self.certificate.to_dict()
        out["predict"] = self.predict.to_dict()
        out["update"] = self.update.to_dict()
        out["diagnostics"] = dict(self.diagnostics)
        return out

    @classmethod
    def from_dict(cls, d) -> "LiftingModel":
        bank = RationalFilterBank.from_dict(d)
        p, u = d["predict"], d["update"]
        return cls(
            bank.rate,
            PredictStep(bank.rate, p["t"], float(p.get("residual_energy", 0.0))),
            UpdateStep(bank.rate, u["s"], float(u.get("residual_energy", 0.0))),
            bank,
            PRCertificate.from_dict(d["certificate"]),
            dict(d.get("diagnostics", {})),
        )


def _as_signal(x) -> Signal:
    return x if isinstance(x, Signal) else Signal(np.asarray(x, dtype=float))


def composite_predict(a: Signal | np.ndarray, step: PredictStep) -> Signal:
    """Predict rate converter plus ``T(z)``: ``down_q1(T R_p up_q2(a))``."""
    a = _as_signal(a)
    q1, q2 = step.rate.q1, step.rate.q2
    return downsample(convolve(upsample(a, q2), step.p_poly), q1)


def composite_update(d: Signal | np.ndarray, step: UpdateStep) -> Signal:
    """Update rate converter plus ``S(z)``: ``down_q2(S R_u up_q1(d))``."""
    d = _as_signal(d)
    q1, q2 = step.rate.q1, step.rate.q2
    return downsample(convolve(upsample(d, q1), step.u_poly), q2)


def branch_analysis(x: Signal | np.ndarray, g: LaurentFilter, q: int, m: int, length: int) -> np.ndarray:
    """One analysis branch with zero extension: ``down_m(g up_q(x))[0:length]``."""
    x = _as_signal(x)
    return downsample(convolve(upsample(x, q), g), m).window(0, length)


def branch_synthesis(v: Signal | np.ndarray, f: LaurentFilter, q: int, m: int, length: int) -> np.ndarray:
    """One synthesis branch with zero extension: ``down_q(f up_m(v))[0:length]``."""
    v = _as_signal(v)
    return downsample(convolve(upsample(v, m), f), q).window(0, length)


def _x_index_of_a(i: np.ndarray, rate: RationalRate) -> np.ndarray:
    return (i // rate.q1) * rate.m + i % rate.q1


def _x_index_of_d(i: np.ndarray, rate: RationalRate) -> np.ndarray:
    return (i // rate.q2) * rate.m + rate.q1 + i % rate.q2


def predict_system(x: Signal | np.ndarray, rate: RationalRate, n_p: int) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares system ``A t ~ b`` whose residual is ``d_new``.

    Column ``k`` is the composite-predict output for ``t = e_k``.  Rows whose
    target or regressors touch samples outside the recorded signal are left
    out, so boundary zeros never bias the fit.
    """
    _check_taps(n_p)
    ss = block_split(x, rate)
    a, d = ss.approx, ss.detail
    nd = len(d)
    cols = []
    for k in range(n_p):
        unit = np.zeros(n_p)
        unit[k] = 1.0
        cols.append(composite_predict(a, PredictStep(rate, unit)).window(0, nd))
    A = np.column_stack(cols) if nd else np.zeros((0, n_p))
    b = d.samples.copy()

    rows = np.arange(nd)
    base = rate.q1 - n_p // 2 + (rate.q1 * rows) // rate.q2
    refs = base[:, None] + np.arange(n_p)[None, :]
    valid = (refs >= 0).all(axis=1) & (refs < len(a)).all(axis=1)
    safe_refs = np.clip(refs, 0, max(len(a) - 1, 0))
    valid &= (_x_index_of_a(safe_refs, rate) < ss.orig_len).all(axis=1)
    valid &= _x_index_of_d(rows, rate) < ss.orig_len
    return A[valid], b[valid]


def _lstsq(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    # SVD-based; returns the minimum-norm solution when A is rank deficient
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = b - A @ sol
    return sol, float(res @ res)


def learn_predict(x: Signal | np.ndarray, rate: RationalRate, n_p: int = 2) -> PredictStep:
    """Fit ``t`` minimizing the energy of the prediction error ``d - a4``."""
    A, b = predict_system(x, rate, n_p)
    if A.shape[0] < n_p:
        raise TooShortSignal(
            f"only {A.shape[0]} usable prediction rows for {n_p} taps at rate {rate}"
        )
    t, energy = _lstsq(A, b)
    log.debug("learned predict taps %s (residual energy %.3g)", t, energy)
    return PredictStep(rate, t, energy)


def update_system(
    x: Signal | np.ndarray,
    rate: RationalRate,
    bank_after_predict: RationalFilterBank,
    n_s: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares system ``B s ~ x - x_rl(0)`` for the update taps.

    ``x_rl(s) = down_q1(F_l up_M(a + d4(s)))`` is affine in ``s``; ``d4`` is
    computed from the post-predict detail band.
    """
    _check_taps(n_s)
    x = _as_signal(x)
    n = len(x)
    q1, q2, m = rate.q1, rate.q2, rate.m
    L = n_blocks_for(n, m)
    fb = bank_after_predict
    a = branch_analysis(x, fb.g_l, q1, m, L * q1)
    d_new = branch_analysis(x, fb.g_h, q2, m, L * q2)
    base = branch_synthesis(a, fb.f_l, q1, m, n)
    cols = []
    for k in range(n_s):
        unit = np.zeros(n_s)
        unit[k] = 1.0
        d4 = composite_update(d_new, UpdateStep(rate, unit)).window(0, L * q1)
        cols.append(branch_synthesis(d4, fb.f_l, q1, m, n))
    B = np.column_stack(cols) if n else np.zeros((0, n_s))
    return B, x.samples - base


def learn_update(
    x: Signal | np.ndarray,
    rate: RationalRate,
    bank_after_predict: RationalFilterBank,
    n_s: int = 2,
) -> UpdateStep:
    """Fit ``s`` so that the lowpass synthesis branch alone best reproduces ``x``."""
    B, r = update_system(x, rate, bank_after_predict, n_s)
    if B.shape[0] < n_s:
        raise TooShortSignal(f"signal too short to learn {n_s} update taps")
    s, energy = _lstsq(B, r)
    log.debug("learned update taps %s (residual energy %.3g)", s, energy)
    return UpdateStep(rate, s, energy)


def _resynthesize(fb: RationalFilterBank, new: RationalFilterBank) -> RationalFilterBank:
    """Synthesis filters of ``new`` by polyphase inversion, scaled to match ``fb``."""
    old_cert = certify(fb)
    c_old, n0_old = (old_cert.c, old_cert.n0) if old_cert.valid else (1.0, 0)
    mb = rational_to_mband(new)
    r, c, n0 = invert_fir(analysis_polyphase(mb))
    synth = synthesis_filters(r)
    # R E = c z^-n0 I; rescale so that R E = c_old z^-n0_old I like the kept filters
    scale = c_old / c
    shift = -(n0_old - n0) * mb.m
    if scale != 1.0 or shift:
        synth = [(f * scale).shift(shift) for f in synth]
    return mband_to_rational(MBandFilterBank(mb.m, mb.analysis, synth), new.rate.q1)


def update_bank_predict(fb: RationalFilterBank, step: PredictStep) -> RationalFilterBank:
    """Fold a predict step into ``G_h`` and recompute ``F_l`` by polyphase inversion."""
    if fb.rate != step.rate:
        raise ValueError("bank and predict step use different rates")
    q1, q2, m = fb.rate.q1, fb.rate.q2, fb.rate.m
    h = laurent_scale_z(fb.g_l, q2) * laurent_scale_z(step.p_poly, m)
    g_h = fb.g_h - equivalent_decimated_filter(h, q1)
    if g_h == fb.g_h:
        return fb
    full = _resynthesize(fb, fb.replace(g_h=g_h))
    return fb.replace(g_h=g_h, f_l=full.f_l)


def update_bank_update(fb: RationalFilterBank, step: UpdateStep) -> RationalFilterBank:
    """Fold an update step into ``G_l`` and recompute ``F_h`` by polyphase inversion."""
    if fb.rate != step.rate:
        raise ValueError("bank and update step use different rates")
    q1, q2, m = fb.rate.q1, fb.rate.q2, fb.rate.m
    h = laurent_scale_z(fb.g_h, q1) * laurent_scale_z(step.u_poly, m)
    g_l = fb.g_l + equivalent_decimated_filter(h, q2)
    if g_l == fb.g_l:
        return fb
    full = _resynthesize(fb, fb.replace(g_l=g_l))
    return fb.replace(g_l=g_l, f_h=full.f_h)


def learn_mrwtl(x: Signal | np.ndarray, rate: RationalRate, n_p: int = 2, n_s: int = 2) -> LiftingModel:
    """Learn a signal-matched rational wavelet starting from the rational Lazy wavelet."""
    x = _as_signal(x)
    lazy = rational_lazy(rate)
    predict = learn_predict(x, rate, n_p)
    after_predict = update_bank_predict(lazy, predict)
    update = learn_update(x, rate, after_predict, n_s)
    bank = update_bank_update(after_predict, update)
    cert = certify(bank)
    if not cert.valid:
        log.warning("learned bank failed PR certification (nmse %.3g)", cert.residual_nmse)
    return LiftingModel(
        rate,
        predict,
        update,
        bank,
        cert,
        {
            "predict_residual_energy": predict.residual_energy,
            "update_residual_energy": update.residual_energy,
            "n_samples": len(x),
        },
    )
