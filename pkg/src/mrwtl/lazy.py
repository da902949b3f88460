"""Lazy wavelets and the block split/merge that defines the a/d subbands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .multirate import LaurentFilter, RationalRate, Signal
from .polyphase import MBandFilterBank, RationalFilterBank, mband_to_rational

__all__ = ["SubbandSignals", "mband_lazy", "rational_lazy", "block_split", "block_merge"]


@dataclass(frozen=True)
class SubbandSignals:
    """Lowpass (``approx``) and highpass (``detail``) outputs of a 2-band RFB.

    ``orig_len`` is the input length before zero padding to ``n_blocks * M``.
    """

    approx: Signal
    detail: Signal
    rate: RationalRate
    n_blocks: int
    orig_len: int

    @property
    def padded_len(self) -> int:
        return self.n_blocks * self.rate.m

    def check(self) -> None:
        q1, q2 = self.rate.q1, self.rate.q2
        if len(self.approx) != self.n_blocks * q1 or len(self.detail) != self.n_blocks * q2:
            raise LengthMismatch(
                f"expected {self.n_blocks * q1} approx and {self.n_blocks * q2} detail samples, "
                f"got {len(self.approx)} and {len(self.detail)}"
            )
        if not 0 <= self.orig_len <= self.padded_len:
            raise LengthMismatch("recorded length exceeds the padded length")


def mband_lazy(m: int) -> MBandFilterBank:
    """``G_i = z**i`` and ``F_i = z**-i``."""
    if m < 2:
        raise ValueError("an M-band lazy wavelet needs m >= 2")
    return MBandFilterBank(
        m,
        [LaurentFilter.monomial(i) for i in range(m)],
        [LaurentFilter.monomial(-i) for i in range(m)],
    )


def rational_lazy(rate: RationalRate) -> RationalFilterBank:
    return mband_to_rational(mband_lazy(rate.m), rate.q1)


def n_blocks_for(n: int, m: int) -> int:
    return -(-n // m)


def block_split(x: Signal | np.ndarray, rate: RationalRate) -> SubbandSignals:
    """First ``q1`` samples of every ``M``-block go to ``approx``, the rest to ``detail``."""
    samples = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    n = samples.size
    L = n_blocks_for(n, rate.m)
    blocks = np.zeros(L * rate.m)
    blocks[:n] = samples
    blocks = blocks.reshape(L, rate.m)
    return SubbandSignals(
        Signal(blocks[:, :rate.q1].reshape(-1)),
        Signal(blocks[:, rate.q1:].reshape(-1)),
        rate,
        L,
        n,
    )


def block_merge(ss: SubbandSignals) -> Signal:
    """Interlace the subbands back into one signal (inverse of :func:`block_split`)."""
    ss.check()
    L, q1, q2 = ss.n_blocks, ss.rate.q1, ss.rate.q2
    out = np.empty((L, ss.rate.m))
    out[:, :q1] = ss.approx.samples.reshape(L, q1)
    out[:, q1:] = ss.detail.samples.reshape(L, q2)
    return Signal(out.reshape(-1)[:ss.orig_len])
