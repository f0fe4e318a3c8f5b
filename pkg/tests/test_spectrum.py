import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakpacket.armodel import ARModel
from weakpacket.detect import DetectorConfig, Segment, SegmentSet
from weakpacket.scenarios import FILL_FREQUENCIES, get_preset
from weakpacket.signals import ChirpSpec, gen_chirp
from weakpacket.spectrum import (FormingFilter, SpectrumEstimate, amplitude_spectrum, build_forming_filter,
                                 filter_operator, fit_model, follow_trajectory, localized_analysis,
                                 peak_excess_db, segment_spectrum, steering, trace_powers, track_peaks)

GRID = 1024
BIN = 0.5 / (GRID - 1)


def model_from_roots(roots):
    a = np.real(np.poly(roots))[1:]
    return ARModel(len(roots), a, 1.0)


def random_stable_model(seed, p):
    rng = np.random.default_rng(seed)
    half = [r * np.exp(1j * th) for r, th in zip(rng.uniform(0.3, 0.99, p // 2), rng.uniform(0.05, 3.0, p // 2))]
    roots = half + [np.conj(z) for z in half]
    if p % 2:
        roots.append(rng.uniform(-0.9, 0.9))
    return model_from_roots(roots)


def sines(freqs, n, amps=None):
    amps = amps or [1.0] * len(freqs)
    t = np.arange(n)
    return sum(a * np.cos(2 * np.pi * f * t + 0.3 + k) for k, (f, a) in enumerate(zip(freqs, amps)))


def test_trace_powers_leading_terms():
    m = ARModel(4, np.array([0.3, -0.2, 0.1, 0.05]), 1.0)
    v = trace_powers(m, 3)
    assert v[0] == 4
    assert v[1] == pytest.approx(-0.3)


@given(seed=st.integers(0, 10_000), p=st.integers(1, 16))
def test_trace_powers_match_eigenvalue_power_sums(seed, p):
    m = random_stable_model(seed, p)
    v = trace_powers(m, 2 * p)
    z = m.roots()
    oracle = np.array([np.sum(z ** n).real for n in range(2 * p + 1)])
    scale = np.maximum(np.abs(oracle), np.sum(np.abs(z) ** np.arange(2 * p + 1)[:, None], axis=1))
    assert np.all(np.abs(v - oracle) <= 1e-8 * scale)


@given(seed=st.integers(0, 10_000), p=st.integers(1, 16))
def test_newton_identity_residual(seed, p):
    a = np.random.default_rng(seed).uniform(-1, 1, p)
    v = trace_powers(ARModel(p, a, 1.0), p)
    for n in range(1, p + 1):
        res = v[n] + sum(a[i - 1] * v[n - i] for i in range(1, n)) + n * a[n - 1]
        assert abs(res) <= 1e-9 * max(1.0, np.abs(v[:n + 1]).max())


@given(seed=st.integers(0, 10_000), p=st.integers(2, 12), extra=st.integers(1, 60))
def test_exactly_representable_segment(seed, p, extra):
    # x_n = sum of z_i^n: every root with unit amplitude
    m = random_stable_model(seed, p)
    x = trace_powers(m, p + extra)[: p + extra]
    ff = build_forming_filter(x, m)
    assert ff.residual <= 1e-6


@given(seed=st.integers(0, 10_000))
def test_residual_self_consistent(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(80)
    m = fit_model(x, 6)
    ff = build_forming_filter(x, m)
    from weakpacket.spectrum import power_matrix
    V = power_matrix(m, x.size - 6 + 1)
    target = x[: x.size - 5]
    assert ff.residual == pytest.approx(np.linalg.norm(target - ff.h @ V) / np.linalg.norm(target), rel=1e-9)


def test_three_sine_symmetric_reconstruction():
    x = sines((0.07, 0.19, 0.33), 160)
    m = fit_model(x, 6, symmetric=True)
    ff = build_forming_filter(x, m)
    assert 1 - ff.residual ** 2 >= 0.999
    assert ff.residual <= 1e-6


def test_single_sinusoid_peak_location_and_amplitude(rng):
    f0 = 200 * BIN  # on the grid
    for p in (4, 6, 8):
        for A0 in (0.5, 2.0):
            x = A0 * (np.cos(2 * np.pi * f0 * np.arange(128) + 0.4) + 1e-5 * rng.standard_normal(128))
            sp = segment_spectrum(x, p, symmetric=True)
            k = int(np.argmax(sp.amplitude))
            assert abs(sp.freqs[k] - f0) <= BIN
            assert sp.one_sided[k] == pytest.approx(A0, rel=0.2)


def test_impulse_filter_flat_response():
    p = 5
    m = ARModel(p, np.zeros(p), 1.0)
    h = np.zeros(p)
    h[0] = 1
    ff = FormingFilter(h, m, 0.0, p)
    np.testing.assert_array_equal(filter_operator(ff), np.eye(p))
    sp = amplitude_spectrum(ff, 64)
    # unit-norm steering vectors: the identity operator passes them unchanged
    np.testing.assert_allclose(sp.amplitude, 1.0, rtol=1e-12)


def test_steering_vectors_have_unit_norm():
    E = steering(np.linspace(0, 0.5, 17), 9)
    np.testing.assert_allclose(np.linalg.norm(E, axis=0), 1.0)


@given(c=st.floats(1e-2, 1e2), seed=st.integers(0, 1000))
def test_amplitude_linearity(c, seed):
    x = np.random.default_rng(seed).standard_normal(96) + sines((0.1, 0.3), 96)
    m = fit_model(x, 8, symmetric=True)
    f1 = build_forming_filter(x, m)
    f2 = build_forming_filter(c * x, m)
    np.testing.assert_allclose(f2.h, c * f1.h, rtol=1e-8, atol=1e-12 * c)
    a1 = amplitude_spectrum(f1, 256).amplitude
    a2 = amplitude_spectrum(f2, 256).amplitude
    np.testing.assert_allclose(a2, c * a1, rtol=1e-7)


def test_empty_segment_set():
    assert localized_analysis(np.ones(100), SegmentSet((), 0.0, 100), 8) == []


def test_short_segments_skipped():
    x = sines((0.1,), 400) + 0.01 * np.random.default_rng(0).standard_normal(400)
    segs = SegmentSet((Segment(0, 10, 1.0), Segment(50, 350, 1.0)), 0.5, 400)
    out = localized_analysis(x, segs, 8, symmetric=True)
    assert len(out) == 1 and out[0].meta["segment"] == 1 and out[0].meta["skipped"] == [0]


@pytest.mark.parametrize("freqs,p", [((0.1,), 4), ((0.1, 0.27), 6), ((0.05, 0.2, 0.4), 8),
                                     ((0.018, 0.27, 0.47), 16)])
def test_unit_circle_models_have_finite_positive_spectrum(freqs, p, rng):
    x = sines(freqs, 256) + 1e-4 * rng.standard_normal(256)
    m = fit_model(x, p, symmetric=True)
    assert np.abs(np.abs(m.roots()) - 1).max() < 1e-6
    ff = build_forming_filter(x, m)
    sp = amplitude_spectrum(ff, GRID)
    assert np.all(np.isfinite(sp.amplitude)) and np.all(sp.amplitude > 0)
    # also exactly at the root frequencies, where an all-pole spectrum has poles
    fr = np.abs(np.angle(m.roots())) / (2 * np.pi)
    y = np.linalg.solve(filter_operator(ff), steering(fr, p))
    A = 1 / np.linalg.norm(y, axis=0)
    assert np.all(np.isfinite(A)) and np.all(A > 0)


def test_singular_operator_flagged():
    m = ARModel(3, np.array([0.0, 0.0, -1.0]), 1.0)
    ff = FormingFilter(np.zeros(3), m, 1.0, 0)
    sp = amplitude_spectrum(ff, 16)
    assert "operator_singular" in sp.flags


def test_stationary_sinusoid_tracks_constant(rng):
    x = np.cos(2 * np.pi * 0.2 * np.arange(1000)) + 1e-5 * rng.standard_normal(1000)
    sg = track_peaks(x, DetectorConfig(200, 50, order_policy=4), 4, symmetric=True)
    tops = [max(pk, key=lambda z: z[1])[0] for pk in sg.peaks]
    assert len(tops) == len(sg.times)
    assert np.ptp(tops) <= BIN and abs(np.mean(tops) - 0.2) <= BIN


def test_two_chirps_separate_trajectories(rng):
    n = 3000
    c1, c2 = ChirpSpec(0.05, 0.2, 0, n), ChirpSpec(0.3, 0.45, 0, n)
    x = gen_chirp(c1, n) + gen_chirp(c2, n) + 1e-4 * rng.standard_normal(n)
    sg = track_peaks(x, DetectorConfig(200, 50, order_policy=8), 8, symmetric=True, fraction=0.3)
    for spec in (c1, c2):
        t, f = follow_trajectory(sg, 0, n, f_start=spec.f_start)
        good = np.abs(f - spec.instantaneous_frequency(t)) < 0.01
        assert good.sum() >= 0.9 * len(sg.times)


def test_peak_excess_db():
    f = np.linspace(0, 0.5, 11)
    A = np.array([1, 2, 1, 1, 10, 1, 1, 1, 3, 1, 1.0])
    sp = SpectrumEstimate(f, A)
    fpk, ex = peak_excess_db(sp, 0.2, 0.01)
    assert fpk == pytest.approx(0.2) and ex == pytest.approx(20 * np.log10(10 / 3))
    assert np.isnan(peak_excess_db(sp, 0.33, 0.01)[0])


def test_symmetric_model_scatters_less():
    sc = get_preset("fig6")
    spread = {}
    for sym in (True, False):
        est = {f: [] for f in FILL_FREQUENCIES}
        for seed in range(50):
            x = sc.record(seed=seed)
            for f, (a, b) in zip(FILL_FREQUENCIES, sc.supports()):
                sp = segment_spectrum(x[a:b], 16, symmetric=sym, grid_size=GRID)
                fpk, _ = peak_excess_db(sp, f, 0.05)
                est[f].append(fpk)
        spread[sym] = sum(np.nanstd(v) for v in est.values())
    assert spread[True] <= spread[False], spread
