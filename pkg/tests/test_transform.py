import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TABLE_RATES
from mrwtl.errors import LengthMismatch
from mrwtl.lazy import block_split, rational_lazy
from mrwtl.lifting import learn_mrwtl
from mrwtl.multirate import LaurentFilter, RationalRate
from mrwtl.polyphase import certify
from mrwtl.signals import ar1, piecewise
from mrwtl.transform import (
    STANDARD_BANKS,
    analyze,
    analyze_multilevel,
    frequency_response,
    pyramid_layout,
    standard_bank,
    synthesis_adjoint_multilevel,
    synthesize,
    synthesize_multilevel,
)

# Published CDF 9/7 analysis lowpass (sum = sqrt 2), centre tap first
CDF97_LOW = [0.8526986790088938, 0.37740285561283066, -0.11062440441843718,
             -0.023849465019556843, 0.03782845550726404]
CDF97_HIGH = [0.7884856164056651, -0.41809227322161724, -0.04068941760916406, 0.06453888262869706]


def _nmse(x, y):
    return float(np.sum((x - y) ** 2) / np.sum(x ** 2))


@pytest.fixture(scope="module")
def learned():
    return {r: learn_mrwtl(ar1(600, seed=2), r).bank for r in TABLE_RATES}


@pytest.mark.parametrize("rate", TABLE_RATES, ids=str)
@pytest.mark.parametrize("n", [300, 301, 457])
def test_single_level_round_trip(learned, rate, n):
    x = piecewise(n)
    ss = analyze(x, learned[rate])
    assert len(ss.approx) + len(ss.detail) == ss.padded_len
    assert _nmse(x, synthesize(ss, learned[rate]).samples) <= 1e-20


@pytest.mark.parametrize("rate", TABLE_RATES, ids=str)
def test_multilevel_round_trip(learned, rate):
    x = ar1(1000, seed=9)
    pyr = analyze_multilevel(x, learned[rate], 3)
    y = synthesize_multilevel(pyr, learned[rate])
    assert len(y) == x.size
    assert _nmse(x, y.samples) <= 1e-20


@pytest.mark.parametrize("rate", TABLE_RATES, ids=str)
def test_critical_sampling_every_level(learned, rate):
    pyr = analyze_multilevel(np.ones(1001), learned[rate], 4)
    padded = pyr.padded_lengths()
    approx_sizes = [len(d) * rate.q1 // rate.q2 for d in pyr.details]
    for lvl in range(pyr.levels):
        assert approx_sizes[lvl] + len(pyr.details[lvl]) == padded[lvl]
    assert pyr.approx.size == approx_sizes[-1]
    assert pyr.count() == padded[-1] + sum(len(d) for d in pyr.details[:-1])


def test_count_for_known_length():
    pyr = pyramid_layout(3000, RationalRate(2, 1, 3), 3)
    assert pyr.lengths == [3000, 2000, 1334]
    assert pyr.padded_lengths() == [3000, 2001, 1335]
    assert pyr.count() == 3002


def test_lazy_multilevel_is_repeated_block_split():
    rate = RationalRate(3, 1, 4)
    x = np.arange(64.0)
    pyr = analyze_multilevel(x, rational_lazy(rate), 2)
    first = block_split(x, rate)
    second = block_split(first.approx, rate)
    np.testing.assert_array_equal(pyr.details[0], first.detail.samples)
    np.testing.assert_array_equal(pyr.details[1], second.detail.samples)
    np.testing.assert_array_equal(pyr.approx, second.approx.samples)


def test_raw_synthesis_is_scaled_delay():
    fb = standard_bank("db2")
    cert = certify(fb)
    x = np.random.default_rng(0).standard_normal(32)
    raw = synthesize(analyze(x, fb), fb, normalize=False).samples
    np.testing.assert_allclose(raw, cert.c * np.roll(x, 2 * cert.n0), atol=1e-12)


def test_vector_round_trip_and_batches(learned):
    rate = RationalRate(2, 3, 5)
    fb = learned[rate]
    x = np.random.default_rng(1).standard_normal((3, 250))
    pyr = analyze_multilevel(x, fb, 2)
    vec = pyr.to_vector()
    assert vec.shape == (3, pyr.count())
    back = synthesize_multilevel(pyr.with_vector(vec), fb)
    np.testing.assert_allclose(back, x, atol=1e-12)
    with pytest.raises(LengthMismatch):
        pyr.with_vector(vec[:, :-1])


def test_adjoint_identity(learned):
    rate = RationalRate(2, 1, 3)
    fb = learned[rate]
    layout = pyramid_layout(200, rate, 3)
    rng = np.random.default_rng(4)
    alpha = rng.standard_normal(layout.count())
    y = rng.standard_normal(200)
    w_alpha = synthesize_multilevel(layout.with_vector(alpha), fb).samples
    wt_y = synthesis_adjoint_multilevel(y, fb, layout).to_vector()
    assert np.dot(w_alpha, y) == pytest.approx(np.dot(alpha, wt_y), rel=1e-12)


def test_rate_mismatch_rejected(learned):
    pyr = analyze_multilevel(np.ones(90), learned[RationalRate(2, 1, 3)], 1)
    with pytest.raises(LengthMismatch):
        synthesize_multilevel(pyr, learned[RationalRate(1, 1, 2)])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(TABLE_RATES), st.integers(20, 200), st.integers(1, 3), st.integers(0, 999))
def test_round_trip_property(rate, n, levels, seed):
    rng = np.random.default_rng(seed)
    fb = learn_mrwtl(rng.standard_normal(120), rate).bank
    x = rng.standard_normal(n)
    y = synthesize_multilevel(analyze_multilevel(x, fb, levels), fb).samples
    np.testing.assert_allclose(y, x, atol=1e-9)


# -- standard banks -------------------------------------------------------------

@pytest.mark.parametrize("name", STANDARD_BANKS)
def test_standard_banks_pr(name):
    fb = standard_bank(name)
    assert certify(fb).residual_nmse <= 1e-8
    x = piecewise(777)
    y = synthesize_multilevel(analyze_multilevel(x, fb, 3), fb).samples
    assert _nmse(x, y) <= 1e-8


def test_bior97_published_coefficients():
    fb = standard_bank("bior9_7")
    low = fb.g_l.terms()
    for k, v in enumerate(CDF97_LOW):
        assert low[k] == pytest.approx(v, abs=1e-9) and low[-k] == pytest.approx(v, abs=1e-9)
    high = fb.g_h.terms()
    for k, v in enumerate(CDF97_HIGH):
        assert high[1 + k] == pytest.approx(v, abs=1e-9) and high[1 - k] == pytest.approx(v, abs=1e-9)


def test_bior53_coefficients():
    fb = standard_bank("bior5_3")
    assert fb.g_l.allclose(LaurentFilter([-0.125, 0.25, 0.75, 0.25, -0.125], -2), atol=1e-15)
    assert fb.g_h.allclose(LaurentFilter([-0.5, 1.0, -0.5], 0), atol=1e-15)


def test_daubechies_filters():
    for name, taps in (("db2", 4), ("db4", 8)):
        h = standard_bank(name).f_l.coeffs
        assert h.size == taps
        assert np.sum(h) == pytest.approx(np.sqrt(2))
        assert np.sum(h ** 2) == pytest.approx(1.0)
        # orthogonal to even shifts
        for s in range(2, taps, 2):
            assert np.dot(h[:-s], h[s:]) == pytest.approx(0.0, abs=1e-12)


def test_unknown_standard_bank():
    with pytest.raises(ValueError):
        standard_bank("haar9")


def test_frequency_response_lazy():
    resp = frequency_response(rational_lazy(RationalRate(2, 1, 3)), 512)
    w = np.pi * resp["freq"]
    assert resp["freq"].size == 512
    np.testing.assert_allclose(resp["g_l"], np.abs(1 + np.exp(-1j * w)), atol=1e-12)
    np.testing.assert_allclose(resp["g_h"], 1.0)
