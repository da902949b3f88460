"""Polyphase matrices, FIR inversion, PR certificates and M-band <-> rational conversion.

Index conventions use the positive-power type-1 form::

    G_i(z) = sum_j z**j      E[i][j](z**M)      (analysis, row = filter)
    F_i(z) = sum_j z**(-j)   R_i,j(z**M)         (synthesis)

The synthesis matrix is stored *phase-major*: ``R.entries[j][i]`` is the
phase-``j`` component of ``F_i``.  With that layout the analysis map is
``v = E x_poly`` and the synthesis map is ``y_poly = R v``, so perfect
reconstruction is literally ``R(z) E(z) = c z**-n0 I`` and the output is
``y[n] = c x[n - M n0]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NotDecomposable, NotFIRInvertible
from .multirate import LaurentFilter, RationalRate, laurent_scale_z

__all__ = [
    "MBandFilterBank",
    "PolyphaseMatrix",
    "PRCertificate",
    "RationalFilterBank",
    "analysis_polyphase",
    "synthesis_polyphase",
    "analysis_filters",
    "synthesis_filters",
    "invert_fir",
    "pr_certificate",
    "mband_to_rational",
    "rational_to_mband",
    "certify",
]

PR_TOLERANCE = 1e-10
MONOMIAL_RTOL = 1e-9

_ZERO = LaurentFilter()


@dataclass(frozen=True)
class MBandFilterBank:
    m: int
    analysis: tuple[LaurentFilter, ...]
    synthesis: tuple[LaurentFilter, ...]

    def __post_init__(self):
        object.__setattr__(self, "analysis", tuple(self.analysis))
        object.__setattr__(self, "synthesis", tuple(self.synthesis))
        if len(self.analysis) != self.m or len(self.synthesis) != self.m:
            raise ValueError(f"an {self.m}-band bank needs {self.m} filters on each side")


@dataclass(frozen=True)
class RationalFilterBank:
    """Two-branch rational filterbank: up q_i, filter, down M per branch."""

    rate: RationalRate
    g_l: LaurentFilter
    g_h: LaurentFilter
    f_l: LaurentFilter
    f_h: LaurentFilter

    def replace(self, **changes) -> "RationalFilterBank":
        fields = dict(rate=self.rate, g_l=self.g_l, g_h=self.g_h, f_l=self.f_l, f_h=self.f_h)
        fields.update(changes)
        return RationalFilterBank(**fields)

    def allclose(self, other: "RationalFilterBank", atol: float = 1e-12) -> bool:
        return self.rate == other.rate and all(
            getattr(self, k).allclose(getattr(other, k), atol) for k in ("g_l", "g_h", "f_l", "f_h")
        )

    def to_dict(self) -> dict:
        return {
            "rate": self.rate.to_dict(),
            "filters": {k: getattr(self, k).to_dict() for k in ("g_l", "g_h", "f_l", "f_h")},
        }

    @classmethod
    def from_dict(cls, d) -> "RationalFilterBank":
        r = d["rate"]
        filt = d["filters"]
        return cls(
            RationalRate(int(r["q1"]), int(r["q2"]), int(r["m"])),
            *(LaurentFilter.from_dict(filt[k]) for k in ("g_l", "g_h", "f_l", "f_h")),
        )


@dataclass(frozen=True)
class PolyphaseMatrix:
    m: int
    entries: tuple[tuple[LaurentFilter, ...], ...]
    kind: str = "analysis"

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if len(rows) != self.m or any(len(row) != self.m for row in rows):
            raise ValueError("polyphase matrix must be m x m")
        if self.kind not in ("analysis", "synthesis", "product"):
            raise ValueError(f"unknown polyphase kind {self.kind!r}")
        object.__setattr__(self, "entries", rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def identity(cls, m: int, kind: str = "analysis") -> "PolyphaseMatrix":
        one = LaurentFilter.monomial(0)
        return cls(m, tuple(tuple(one if i == j else _ZERO for j in range(m)) for i in range(m)), kind)

    def __matmul__(self, other: "PolyphaseMatrix") -> "PolyphaseMatrix":
        if self.m != other.m:
            raise ValueError("dimension mismatch")
        m = self.m
        rows = []
        for i in range(m):
            row = []
            for j in range(m):
                acc = _ZERO
                for k in range(m):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not (a.is_zero or b.is_zero):
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return PolyphaseMatrix(m, tuple(rows), "product")

    def determinant(self) -> LaurentFilter:
        return _det(self.entries, tuple(range(self.m)), tuple(range(self.m)))

    def adjugate(self) -> tuple[tuple[LaurentFilter, ...], ...]:
        m = self.m
        if m == 1:
            return ((LaurentFilter.monomial(0),),)
        full = tuple(range(m))
        adj = [[_ZERO] * m for _ in range(m)]
        for i in range(m):
            for j in range(m):
                rows = tuple(r for r in full if r != j)
                cols = tuple(c for c in full if c != i)
                minor = _det(self.entries, rows, cols)
                adj[i][j] = minor if (i + j) % 2 == 0 else -minor
        return tuple(tuple(row) for row in adj)


def _det(entries, rows: tuple[int, ...], cols: tuple[int, ...]) -> LaurentFilter:
    # Laplace expansion along the first remaining row; memoized per call tree.
    @lru_cache(maxsize=None)
    def rec(rs: tuple[int, ...], cs: tuple[int, ...]) -> LaurentFilter:
        if len(rs) == 1:
            return entries[rs[0]][cs[0]]
        r0, rest = rs[0], rs[1:]
        acc = _ZERO
        for k, c in enumerate(cs):
            a = entries[r0][c]
            if a.is_zero:
                continue
            sub = rec(rest, cs[:k] + cs[k + 1:])
            if sub.is_zero:
                continue
            term = a * sub
            acc = acc + (term if k % 2 == 0 else -term)
        return acc

    return rec(rows, cols)


@dataclass(frozen=True)
class PRCertificate:
    """Best monomial fit ``R(z)E(z) ~ c z**-n0 I`` and its relative misfit."""

    c: float
    n0: int
    residual_nmse: float

    @property
    def valid(self) -> bool:
        return self.residual_nmse <= PR_TOLERANCE

    def to_dict(self) -> dict:
        return {"c": self.c, "n0": self.n0, "residual_nmse": self.residual_nmse}

    @classmethod
    def from_dict(cls, d) -> "PRCertificate":
        return cls(float(d["c"]), int(d["n0"]), float(d["residual_nmse"]))


def _split_phases(h: LaurentFilter, m: int, sign: int) -> list[LaurentFilter]:
    # sign=+1: h = sum_j z**j P_j(z**m);  sign=-1: h = sum_j z**-j P_j(z**m)
    buckets: list[dict[int, float]] = [{} for _ in range(m)]
    for e, c in h.terms().items():
        j = (sign * e) % m
        k = (e - sign * j) // m
        buckets[j][k] = c
    return [LaurentFilter.from_terms(b) for b in buckets]


def _merge_phases(parts: Sequence[LaurentFilter], m: int, sign: int) -> LaurentFilter:
    acc = _ZERO
    for j, p in enumerate(parts):
        acc = acc + laurent_scale_z(p, m).shift(sign * j)
    return acc


def analysis_polyphase(fb: MBandFilterBank) -> PolyphaseMatrix:
    """Type-1 matrix with ``G_i(z) = sum_j z**j E[i][j](z**M)``."""
    rows = tuple(tuple(_split_phases(g, fb.m, +1)) for g in fb.analysis)
    return PolyphaseMatrix(fb.m, rows, "analysis")


def synthesis_polyphase(fb: MBandFilterBank) -> PolyphaseMatrix:
    """Type-2 matrix, phase-major: ``entries[j][i]`` is phase ``j`` of ``F_i``."""
    cols = [_split_phases(f, fb.m, -1) for f in fb.synthesis]
    rows = tuple(tuple(cols[i][j] for i in range(fb.m)) for j in range(fb.m))
    return PolyphaseMatrix(fb.m, rows, "synthesis")


def analysis_filters(e: PolyphaseMatrix) -> list[LaurentFilter]:
    return [_merge_phases(e.entries[i], e.m, +1) for i in range(e.m)]


def synthesis_filters(r: PolyphaseMatrix) -> list[LaurentFilter]:
    return [_merge_phases([r.entries[j][i] for j in range(r.m)], r.m, -1) for i in range(r.m)]


def invert_fir(e: PolyphaseMatrix) -> tuple[PolyphaseMatrix, float, int]:
    """FIR synthesis matrix for an analysis matrix with monomial determinant.

    Returns ``(R, c, n0)`` with ``R = adj(E)`` so that ``R E = det(E) I =
    c z**-n0 I``; the scale produced by the adjugate is kept as is.

    Raises
    ------
    NotFIRInvertible
        If the determinant has more than one significant coefficient.
    """
    det = e.determinant()
    if det.is_zero:
        raise NotFIRInvertible("polyphase determinant is identically zero")
    mags = np.abs(det.coeffs)
    peak = int(np.argmax(mags))
    significant = np.flatnonzero(mags > MONOMIAL_RTOL * mags[peak])
    if significant.size != 1:
        raise NotFIRInvertible(
            f"determinant is not a monomial ({significant.size} significant terms); "
            "the bank was not produced by lifting steps"
        )
    c = float(det.coeffs[peak])
    n0 = -(det.min_exp + peak)
    r = PolyphaseMatrix(e.m, e.adjugate(), "synthesis")
    return r, c, n0


def pr_certificate(e: PolyphaseMatrix, r: PolyphaseMatrix) -> PRCertificate:
    """Fit ``R(z)E(z)`` with ``c z**-n0 I`` in the Frobenius sense."""
    if e.m != r.m:
        raise ValueError("polyphase matrices have different sizes")
    prod = r @ e
    m = e.m
    total = sum(prod.entries[i][j].energy() for i in range(m) for j in range(m))
    if total == 0.0:
        return PRCertificate(0.0, 0, 1.0)
    diag_terms: dict[int, float] = {}
    for i in range(m):
        for k, v in prod.entries[i][i].terms().items():
            diag_terms[k] = diag_terms.get(k, 0.0) + v
    # deviation at exponent k is total - m * c_k**2 with c_k the diagonal mean
    best_k = max(sorted(diag_terms), key=lambda k: abs(diag_terms[k]))
    c = diag_terms[best_k] / m
    deviation = max(total - m * c * c, 0.0)
    # recompute directly when the subtraction loses all precision
    if deviation < 1e-6 * total:
        mono = LaurentFilter.monomial(best_k, c)
        deviation = sum(
            (prod.entries[i][j] - mono if i == j else prod.entries[i][j]).energy()
            for i in range(m)
            for j in range(m)
        )
    return PRCertificate(float(c), int(-best_k), float(deviation / total))


def mband_to_rational(fb: MBandFilterBank, q1: int) -> RationalFilterBank:
    """Merge an M-band bank into the 2-band rational form with rates q1/M, q2/M."""
    m = fb.m
    if not 1 <= q1 < m:
        raise ValueError("need 1 <= q1 < m")
    rate = RationalRate.from_q1(q1, m)
    q2 = rate.q2

    def merge(filters, q, sign):
        acc = _ZERO
        for i, f in enumerate(filters):
            acc = acc + laurent_scale_z(f, q).shift(sign * i * m)
        return acc

    return RationalFilterBank(
        rate,
        g_l=merge(fb.analysis[:q1], q1, -1),
        g_h=merge(fb.analysis[q1:], q2, -1),
        f_l=merge(fb.synthesis[:q1], q1, +1),
        f_h=merge(fb.synthesis[q1:], q2, +1),
    )


def _unmerge(h: LaurentFilter, q: int, m: int, sign: int) -> list[LaurentFilter]:
    # invert h = sum_{i<q} z**(sign*i*m) F_i(z**q)
    if q == 1:
        return [h]
    inv = pow(m, -1, q)
    buckets: list[dict[int, float]] = [{} for _ in range(q)]
    for e, c in h.terms().items():
        i = (sign * e * inv) % q
        rem = e - sign * i * m
        if rem % q:
            raise NotDecomposable(f"exponent {e} does not fall on any (i, z^{q}) slot")
        buckets[i][rem // q] = c
    return [LaurentFilter.from_terms(b) for b in buckets]


def rational_to_mband(fb: RationalFilterBank) -> MBandFilterBank:
    """Exact left inverse of :func:`mband_to_rational`."""
    q1, q2, m = fb.rate.q1, fb.rate.q2, fb.rate.m
    analysis = _unmerge(fb.g_l, q1, m, -1) + _unmerge(fb.g_h, q2, m, -1)
    synthesis = _unmerge(fb.f_l, q1, m, +1) + _unmerge(fb.f_h, q2, m, +1)
    return MBandFilterBank(m, analysis, synthesis)


def certify(fb: RationalFilterBank | MBandFilterBank) -> PRCertificate:
    """PR certificate of a bank's own analysis/synthesis pair."""
    mb = rational_to_mband(fb) if isinstance(fb, RationalFilterBank) else fb
    return pr_certificate(analysis_polyphase(mb), synthesis_polyphase(mb))
