import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from mrwtl.cs import (
    RESULT_COLUMNS,
    CsExperimentConfig,
    WaveletOperator,
    basis_pursuit,
    gaussian_matrix,
    psnr,
    run_cs_experiment,
)
from mrwtl.errors import LengthMismatch, NoConvergence
from mrwtl.lazy import rational_lazy
from mrwtl.multirate import RationalRate
from mrwtl.signals import piecewise
from mrwtl.transform import standard_bank


def _lp_l1(phi, y):
    """min 1'(p + q) s.t. phi (p - q) = y, p, q >= 0."""
    n = phi.shape[1]
    res = linprog(np.ones(2 * n), A_eq=np.hstack([phi, -phi]), b_eq=y, bounds=(0, None), method="highs")
    return res.x[:n] - res.x[n:]


def _sparsest(phi, y, max_k=2):
    n = phi.shape[1]
    for k in range(1, max_k + 1):
        for supp in itertools.combinations(range(n), k):
            sub = phi[:, supp]
            coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
            if np.linalg.norm(sub @ coef - y) < 1e-10:
                out = np.zeros(n)
                out[list(supp)] = coef
                return out
    return None


def test_gaussian_matrix_seeded():
    a = gaussian_matrix(50, 200, 3).entries
    np.testing.assert_array_equal(a, gaussian_matrix(50, 200, 3).entries)
    assert not np.array_equal(a, gaussian_matrix(50, 200, 4).entries)
    assert a.var() == pytest.approx(1 / 50, rel=0.05)
    with pytest.raises(ValueError):
        gaussian_matrix(0, 10, 1)


def test_bp_recovers_two_sparse():
    rng = np.random.default_rng(0)
    a = gaussian_matrix(8, 16, 21)
    alpha = np.zeros(16)
    alpha[[3, 11]] = [1.5, -0.7]
    y = a.entries @ alpha
    res = basis_pursuit(a, None, y, max_iter=20000, tol=1e-10)
    np.testing.assert_allclose(res.alpha, alpha, atol=1e-6)
    np.testing.assert_allclose(res.alpha, _sparsest(a.entries, y), atol=1e-6)
    np.testing.assert_allclose(res.alpha, _lp_l1(a.entries, y), atol=1e-6)
    assert res.converged


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_bp_matches_linear_program(seed):
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal((12, 30))
    y = rng.standard_normal(12)
    res = basis_pursuit(phi, None, y, max_iter=20000, tol=1e-10)
    ref = _lp_l1(phi, y)
    assert res.l1 == pytest.approx(np.abs(ref).sum(), rel=1e-5)
    assert res.constraint_residual <= 1e-9 * np.linalg.norm(y)
    assert all(b <= a for a, b in zip(res.l1_history, res.l1_history[1:]))


def test_bp_zero_measurements():
    res = basis_pursuit(np.ones((3, 5)), None, np.zeros(3))
    np.testing.assert_array_equal(res.alpha, 0.0)
    assert res.converged


def test_bp_inconsistent_system_raises():
    phi = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(NoConvergence) as info:
        basis_pursuit(phi, None, np.array([1.0, 2.0]), max_iter=50)
    assert info.value.result is not None


def test_bp_shape_mismatch():
    with pytest.raises(LengthMismatch):
        basis_pursuit(np.ones((3, 5)), None, np.ones(4))


def test_wavelet_operator_matrix_and_adjoint():
    op = WaveletOperator(standard_bank("db2"), 2, 40)
    rng = np.random.default_rng(2)
    alpha = rng.standard_normal(op.n_coeffs)
    np.testing.assert_allclose(op.matrix @ alpha, op.forward(alpha), atol=1e-12)
    y = rng.standard_normal(40)
    np.testing.assert_allclose(op.adjoint(y), op.matrix.T @ y, atol=1e-12)


def test_square_sensing_reconstructs_exactly():
    x = piecewise(90)
    op = WaveletOperator(rational_lazy(RationalRate(2, 1, 3)), 2, x.size)
    a = gaussian_matrix(x.size, x.size, 5)
    res = basis_pursuit(a, op, a.entries @ x)
    assert psnr(x, op.forward(res.alpha)) >= 80.0


def test_psnr_known_value():
    x = np.array([1.0, 2.0, 4.0])
    y = x + np.array([0.0, 0.0, 0.4])
    assert psnr(x, y) == pytest.approx(10 * math.log10(16 / (0.16 / 3)))
    assert psnr(x, x) == math.inf


def test_psnr_errors():
    with pytest.raises(ValueError):
        psnr(-np.ones(3), np.zeros(3))
    with pytest.raises(LengthMismatch):
        psnr(np.ones(3), np.ones(4))


def test_config_json_round_trip(tmp_path):
    cfg = CsExperimentConfig(trials=3, sampling_ratios=[20, 40], seed=9)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert CsExperimentConfig.from_json(path) == cfg


@pytest.mark.parametrize("bad", [{"trials": 0}, {"sampling_ratios": [0]}, {"banks": ["nope"]}, {"rates": ["2/4"]}])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        CsExperimentConfig(**bad)


def test_experiment_rows_deterministic():
    cfg = CsExperimentConfig(trials=2, sampling_ratios=[30, 100], levels=2, signal_length=270, max_iter=300)
    rows = run_cs_experiment(cfg)
    assert [set(r) for r in rows] == [set(RESULT_COLUMNS)] * 4
    assert [(r["bank"], r["sr_percent"]) for r in rows] == [
        ("matched", 30), ("matched", 100), ("lazy", 30), ("lazy", 100)]
    again = run_cs_experiment(cfg)
    assert json.dumps(rows) == json.dumps(again)
    threaded = run_cs_experiment(CsExperimentConfig(**{**cfg.__dict__, "workers": 2}))
    assert json.dumps(rows) == json.dumps(threaded)


def test_experiment_multiple_rates_and_standard():
    cfg = CsExperimentConfig(trials=1, sampling_ratios=[50], levels=1, signal_length=240,
                             rates=["2/3", "1/2"], banks=["matched", "lazy", "db2"], max_iter=200)
    names = [r["bank"] for r in run_cs_experiment(cfg)]
    assert names == ["matched@2/3", "lazy@2/3", "matched@1/2", "lazy@1/2", "db2"]


def test_experiment_too_short():
    with pytest.raises(ValueError):
        run_cs_experiment(CsExperimentConfig(trials=1, signal_length=20, levels=3))
