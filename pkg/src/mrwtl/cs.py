"""Compressed-sensing evaluation: Gaussian sensing, basis pursuit in a wavelet domain, PSNR."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import LengthMismatch, NoConvergence
from .lazy import rational_lazy
from .lifting import learn_mrwtl
from .multirate import RationalRate, Signal
from .polyphase import RationalFilterBank, certify
from .transform import (
    STANDARD_BANKS,
    pyramid_layout,
    standard_bank,
    synthesis_adjoint_multilevel,
    synthesize_multilevel,
)

log = logging.getLogger(__name__)

__all__ = [
    "MeasurementMatrix",
    "WaveletOperator",
    "BPResult",
    "CsExperimentConfig",
    "gaussian_matrix",
    "basis_pursuit",
    "psnr",
    "run_cs_experiment",
    "RESULT_COLUMNS",
]

RESULT_COLUMNS = ("signal", "bank", "sr_percent", "trials", "mean_psnr_db", "std_psnr_db")


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    entries: np.ndarray
    seed: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def gaussian_matrix(m_meas: int, n: int, seed) -> MeasurementMatrix:
    """I.i.d. N(0, 1/m_meas) entries, fully determined by ``seed``."""
    if not 1 <= m_meas <= n:
        raise ValueError("need 1 <= m_meas <= n")
    rng = np.random.default_rng(seed)
    entries = rng.standard_normal((m_meas, n)) / math.sqrt(m_meas)
    entries.setflags(write=False)
    return MeasurementMatrix(entries, seed if isinstance(seed, int) else None)


class WaveletOperator:
    """Multi-level synthesis ``x = W alpha`` for a fixed bank and signal length."""

    def __init__(self, bank: RationalFilterBank, levels: int, signal_len: int):
        self.bank = bank
        self.levels = levels
        self.signal_len = signal_len
        self.layout = pyramid_layout(signal_len, bank.rate, levels)
        self.certificate = certify(bank)

    @property
    def n_coeffs(self) -> int:
        return self.layout.count()

    def forward(self, alpha: np.ndarray) -> np.ndarray:
        out = synthesize_multilevel(self.layout.with_vector(alpha), self.bank, self.certificate)
        return out.samples if isinstance(out, Signal) else out

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return synthesis_adjoint_multilevel(y, self.bank, self.layout, self.certificate).to_vector()

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense ``signal_len x n_coeffs`` matrix (columns are synthesized atoms)."""
        return np.ascontiguousarray(self.forward(np.eye(self.n_coeffs)).T)


@dataclass
class BPResult:
    alpha: np.ndarray
    iterations: int
    converged: bool
    constraint_residual: float
    l1_history: list[float] = field(default_factory=list)

    @property
    def l1(self) -> float:
        return float(np.abs(self.alpha).sum())


class _AffineProjector:
    """Euclidean projection onto ``{v : Phi v = y}``.

    Uses whichever of the row space or the null space is smaller, so one
    projection costs ``O(n min(m, n - m))``.
    """

    def __init__(self, phi: np.ndarray, y: np.ndarray):
        m, n = phi.shape
        wide = 2 * m > n
        q, r = np.linalg.qr(phi.T, mode="complete" if wide else "reduced")
        diag = np.abs(np.diag(r))
        if diag.size and diag.min() > 1e-10 * diag.max():
            self.offset = q[:, :m] @ np.linalg.solve(r[:m].T, y)
            self.null_basis = q[:, m:] if wide else None
            self.row_basis = None if wide else q
        else:
            # rank deficient: fall back to the SVD row space
            u, s, vt = np.linalg.svd(phi, full_matrices=False)
            keep = s > 1e-10 * (s[0] if s.size else 0.0)
            self.row_basis = vt[keep].T
            self.null_basis = None
            self.offset = self.row_basis @ ((u[:, keep].T @ y) / s[keep])

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if self.null_basis is not None:
            return self.null_basis @ (self.null_basis.T @ v) + self.offset
        return v - self.row_basis @ (self.row_basis.T @ v) + self.offset


_MAX_RHO_CHANGES = 20


def _soft(v: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def basis_pursuit(
    a: MeasurementMatrix | np.ndarray,
    w: WaveletOperator | np.ndarray | None,
    y: np.ndarray,
    eps: float = 0.0,
    max_iter: int = 5000,
    tol: float = 1e-7,
    rho: float | None = None,
    relax: float = 1.6,
) -> BPResult:
    """Solve ``min ||alpha||_1  s.t.  A W alpha = y`` by ADMM.

    Every ``x``-iterate is the projection onto the constraint set, so the
    returned coefficients are feasible up to rounding; ``eps`` is the
    feasibility tolerance.  The best (smallest l1) feasible iterate seen so
    far is returned, hence ``l1_history`` never increases.

    Raises
    ------
    NoConvergence
        The constraint residual of the returned iterate exceeds ``10 * eps``
        (with a rounding floor), e.g. for an inconsistent system.  The partial
        :class:`BPResult` is attached to the exception.
    """
    A = a.entries if isinstance(a, MeasurementMatrix) else np.asarray(a, dtype=float)
    if w is None:
        phi = A
    else:
        W = w.matrix if isinstance(w, WaveletOperator) else np.asarray(w, dtype=float)
        phi = A @ W
    y = np.asarray(y, dtype=float)
    if phi.shape[0] != y.size:
        raise LengthMismatch(f"{phi.shape[0]} measurements but y has {y.size} entries")
    n = phi.shape[1]
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0.0:
        return BPResult(np.zeros(n), 0, True, 0.0, [0.0])

    project = _AffineProjector(phi, y)
    x = project(np.zeros(n))
    if rho is None:
        rho = 1.0 / max(np.abs(x).mean(), 1e-12)
    z = _soft(x, 1.0 / rho)
    u = np.zeros(n)
    best = x.copy()
    best_l1 = float(np.abs(x).sum())
    history = [best_l1]
    converged = False
    rho_changes = 0
    it = 0
    for it in range(1, max_iter + 1):
        x = project(z - u)
        z_old = z
        # over-relaxed ADMM (Eckstein-Bertsekas), relax in (1, 2)
        x_hat = relax * x + (1.0 - relax) * z_old
        z = _soft(x_hat + u, 1.0 / rho)
        u += x_hat - z
        l1 = float(np.abs(x).sum())
        if l1 < best_l1:
            best, best_l1 = x.copy(), l1
        history.append(best_l1)

        r_norm = np.linalg.norm(x - z)
        s_norm = rho * np.linalg.norm(z - z_old)
        scale = max(np.linalg.norm(x), np.linalg.norm(z), 1e-300)
        if r_norm <= tol * scale and s_norm <= tol * max(rho * np.linalg.norm(u), 1e-300):
            converged = True
            break
        # residual balancing, frozen after a few changes so the fixed-rho
        # convergence guarantee applies to the tail of the run
        if it % 10 == 0 and rho_changes < _MAX_RHO_CHANGES:
            if r_norm > 10 * s_norm:
                rho *= 2.0
                u /= 2.0
                rho_changes += 1
            elif s_norm > 10 * r_norm:
                rho /= 2.0
                u *= 2.0
                rho_changes += 1

    residual = float(np.linalg.norm(phi @ best - y))
    result = BPResult(best, it, converged, residual, history)
    if residual > max(10.0 * eps, 1e-9 * y_norm):
        state = "converged" if converged else f"stopped after {it} iterations"
        raise NoConvergence(f"basis pursuit {state} with constraint residual {residual:.3g}", result)
    return result


def psnr(x: Signal | np.ndarray, xhat: Signal | np.ndarray) -> float:
    """``10 log10(max(x)**2 / MSE)`` using the signed maximum of ``x``."""
    xs = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=float)
    xh = xhat.samples if isinstance(xhat, Signal) else np.asarray(xhat, dtype=float)
    if xs.shape != xh.shape:
        raise LengthMismatch(f"signals have lengths {xs.size} and {xh.size}")
    peak = float(xs.max())
    if peak <= 0.0:
        raise ValueError("PSNR uses max(x), which must be positive")
    mse = float(np.mean((xs - xh) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


@dataclass
class CsExperimentConfig:
    """Protocol knobs; ``signal`` is a bundled signal name or a CSV/WAV path."""

    signal: str = "piecewise"
    signal_length: int | None = None
    rates: list[str] = field(default_factory=lambda: ["2/3"])
    banks: list[str] = field(default_factory=lambda: ["matched", "lazy"])
    sampling_ratios: list[int] = field(default_factory=lambda: list(range(10, 100, 10)))
    trials: int = 50
    levels: int = 3
    n_p: int = 2
    n_s: int = 2
    train_fraction: float = 1.0 / 3.0
    solver_tol: float = 1e-6
    max_iter: int = 1000
    eps: float = 1e-6
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for sr in self.sampling_ratios:
            if not 0 < sr <= 100:
                raise ValueError(f"sampling ratio {sr} outside (0, 100]")
        for name in self.banks:
            if name not in ("matched", "lazy") + STANDARD_BANKS:
                raise ValueError(f"unknown bank {name!r}")
        for r in self.rates:
            RationalRate.parse(r)

    @classmethod
    def from_json(cls, path: str | Path) -> "CsExperimentConfig":
        return cls(**json.loads(Path(path).read_text()))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _trial_seed(seed: int, sr: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, sr, trial])


def build_banks(cfg: CsExperimentConfig, train: np.ndarray) -> dict[str, RationalFilterBank]:
    banks: dict[str, RationalFilterBank] = {}
    for rate_text in cfg.rates:
        rate = RationalRate.parse(rate_text)
        suffix = f"@{rate}" if len(cfg.rates) > 1 else ""
        if "matched" in cfg.banks:
            banks["matched" + suffix] = learn_mrwtl(train, rate, cfg.n_p, cfg.n_s).bank
        if "lazy" in cfg.banks:
            banks["lazy" + suffix] = rational_lazy(rate)
    for name in cfg.banks:
        if name in STANDARD_BANKS:
            banks[name] = standard_bank(name)
    return banks


def run_cs_experiment(
    cfg: CsExperimentConfig,
    signal: np.ndarray | None = None,
    signal_name: str | None = None,
) -> list[dict]:
    """Learn on the first part of the signal, sense and recover the rest.

    Returns one row per (bank, sampling ratio) with the mean and standard
    deviation of PSNR over ``cfg.trials`` seeded trials.  Every bank sees the
    same measurement matrix within a trial.
    """
    if signal is None:
        from .signals import load_signal

        signal = load_signal(cfg.signal, cfg.signal_length)
        signal_name = signal_name or cfg.signal
    x = np.asarray(signal.samples if isinstance(signal, Signal) else signal, dtype=float)
    n_train = int(round(x.size * cfg.train_fraction))
    train, test = x[:n_train], x[n_train:]
    max_m = max(RationalRate.parse(r).m for r in cfg.rates)
    if n_train < 4 * max_m or test.size < max_m ** cfg.levels:
        raise ValueError("signal too short for the requested rates and levels")

    banks = build_banks(cfg, train)
    ops = {name: WaveletOperator(fb, cfg.levels, test.size) for name, fb in banks.items()}
    for op in ops.values():
        op.matrix  # build once, shared by all trials

    def one_trial(job):
        sr, trial = job
        m_meas = max(1, min(test.size, int(round(sr / 100.0 * test.size))))
        A = gaussian_matrix(m_meas, test.size, _trial_seed(cfg.seed, sr, trial))
        y = A.entries @ test
        scores = {}
        for name, op in ops.items():
            try:
                res = basis_pursuit(A, op, y, cfg.eps, cfg.max_iter, cfg.solver_tol)
            except NoConvergence as exc:
                log.warning("%s sr=%d trial=%d: %s", name, sr, trial, exc)
                res = exc.result
            scores[name] = psnr(test, op.forward(res.alpha))
        return scores

    jobs = [(sr, t) for sr in cfg.sampling_ratios for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(one_trial, jobs))
    else:
        outcomes = [one_trial(j) for j in jobs]

    rows = []
    for name in banks:
        for sr in cfg.sampling_ratios:
            vals = np.array([o[name] for (s, _), o in zip(jobs, outcomes) if s == sr])
            rows.append({
                "signal": signal_name or "signal",
                "bank": name,
                "sr_percent": sr,
                "trials": cfg.trials,
                "mean_psnr_db": float(np.mean(vals)),
                "std_psnr_db": float(np.std(vals)),
            })
    return rows
