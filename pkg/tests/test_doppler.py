import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_complex
from ldhsvd import (
    FrequencyBand,
    HologramStack,
    InvalidInputError,
    PowerDopplerImage,
    Roi,
    dpsd_window,
    plan_windows,
    power_doppler,
    roi_mean_series,
    spectrogram,
)
from ldhsvd.doppler import DopplerSpectrum, band_mask


def tone(n_t, k):
    return np.exp(2j * np.pi * k * np.arange(n_t) / n_t)


def test_band_parsing():
    assert FrequencyBand.parse("2k:6k") == FrequencyBand(2000, 6000)
    assert FrequencyBand.parse("100:250.5") == FrequencyBand(100, 250.5)
    for bad in ("6k:2k", "2k", "a:b", "-1:3"):
        with pytest.raises(InvalidInputError):
            FrequencyBand.parse(bad)


def test_dc_signal():
    n_t, c = 64, 2 - 1j
    s = dpsd_window(np.full(n_t, c), 1000.0)
    zero = np.flatnonzero(s.freqs == 0)[0]
    assert s.values[zero] == pytest.approx(n_t ** 2 * abs(c) ** 2)
    assert np.all(np.delete(s.values, zero) <= 1e-10 * s.values[zero])


@pytest.mark.parametrize("k", [1, 5, -7, 32])
def test_pure_tone(k):
    n_t, fs = 64, 6400.0
    s = dpsd_window(tone(n_t, k), fs)
    peak = np.argmax(s.values)
    f = k * fs / n_t
    assert s.freqs[peak] == pytest.approx(f if f != -fs / 2 else fs / 2)
    assert s.values[peak] == pytest.approx(n_t ** 2)
    assert np.all(np.delete(s.values, peak) < 1e-18 * n_t ** 2 + 1e-20)


def test_negative_nyquist_is_labelled_positive():
    s = dpsd_window(tone(8, 4), 8.0)
    assert s.freqs[np.argmax(s.values)] == 4.0


@settings(max_examples=50, deadline=None)
@given(n_t=st.integers(2, 64), npix=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_parseval(n_t, npix, seed):
    h = random_complex(np.random.default_rng(seed), (npix, n_t))
    s = dpsd_window(h, 1.0)
    np.testing.assert_allclose(
        s.values.sum(axis=-1), n_t * np.sum(np.abs(h) ** 2, axis=-1), rtol=1e-5
    )
    assert np.all(s.values >= 0)


def test_stack_slice_input_keeps_image_axes(rng):
    s = dpsd_window(random_complex(rng, (3, 4, 16)), 100.0, window_start=32)
    assert s.values.shape == (3, 4, 16)
    assert s.window_start == 32


def test_rejects_bad_windows():
    with pytest.raises(InvalidInputError):
        dpsd_window(np.ones(1), 1.0)
    with pytest.raises(InvalidInputError):
        dpsd_window(np.array([1.0, np.nan]), 1.0)


def test_taper_option(rng):
    h = random_complex(rng, 32)
    plain = dpsd_window(h, 1.0)
    assert np.array_equal(dpsd_window(h, 1.0, taper="boxcar").values, plain.values)
    hann = dpsd_window(h, 1.0, taper="hann")
    assert not np.allclose(hann.values, plain.values)
    with pytest.raises(InvalidInputError):
        dpsd_window(h, 1.0, taper=np.ones(5))


def test_time_shift_invariance(rng):
    h = random_complex(rng, (4, 40))
    a = dpsd_window(h, 1.0).values
    b = dpsd_window(np.roll(h, 13, axis=-1), 1.0).values
    np.testing.assert_allclose(b, a, rtol=1e-5, atol=1e-9 * a.max())


def test_power_doppler_excludes_dc():
    s = dpsd_window(np.ones(128), 60e3)
    assert power_doppler(s, FrequencyBand(2e3, 6e3)).m0 == 0


def test_band_selectivity():
    fs, n_t = 66e3, 66
    s = dpsd_window(tone(n_t, 4), fs)  # 4 kHz
    energy = n_t ** 2 * fs / n_t
    assert power_doppler(s, FrequencyBand(2e3, 6e3)).m0 == pytest.approx(energy)
    assert power_doppler(s, FrequencyBand(10e3, 30e3)).m0 == pytest.approx(0, abs=1e-12 * energy)


def test_full_band_equals_total_power(rng):
    fs, n_t = 60e3, 256
    h = random_complex(rng, (10, n_t))
    m0 = power_doppler(dpsd_window(h, fs), FrequencyBand(0, fs / 2)).m0
    expected = n_t * np.sum(np.abs(h) ** 2, axis=-1) * fs / n_t
    np.testing.assert_allclose(m0, expected, rtol=1e-5)


def test_one_sided_option():
    fs, n_t = 64.0, 64
    s = dpsd_window(tone(n_t, -5), fs)
    band = FrequencyBand(2, 10)
    assert power_doppler(s, band).m0 > 0
    assert power_doppler(s, band, two_sided=False).m0 == pytest.approx(0, abs=1e-9)


def test_disjoint_band_additivity_is_exact(rng):
    fs, n_t = 60e3, 128
    s = dpsd_window(random_complex(rng, (5, n_t)), fs)
    edges = [0, 1000, 2000, 6000, 17500, 30000]
    parts = [power_doppler(s, FrequencyBand(a, b)).m0 for a, b in zip(edges, edges[1:])]
    whole = power_doppler(s, FrequencyBand(0, 30000)).m0
    # bins are partitioned, so the sums agree to rounding of the addition order
    np.testing.assert_allclose(sum(parts), whole, rtol=1e-13)
    masks = [band_mask(s.freqs, FrequencyBand(a, b), fs) for a, b in zip(edges, edges[1:])]
    assert np.array_equal(np.sum(masks, axis=0), np.ones(n_t))


@settings(max_examples=50, deadline=None)
@given(
    f1=st.floats(0, 10e3), w1=st.floats(100, 10e3), grow=st.floats(0, 10e3),
    seed=st.integers(0, 2**32 - 1),
)
def test_monotone_in_band(f1, w1, grow, seed):
    fs, n_t = 60e3, 64
    s = dpsd_window(random_complex(np.random.default_rng(seed), (3, n_t)), fs)
    inner = FrequencyBand(f1 + grow / 2, f1 + grow / 2 + w1)
    outer = FrequencyBand(f1, min(f1 + w1 + grow, fs / 2))
    try:
        a = power_doppler(s, inner).m0
    except InvalidInputError:
        return
    assert np.all(power_doppler(s, outer).m0 >= a)


def test_empty_band_rejected():
    s = dpsd_window(np.ones(8), 8.0)
    with pytest.raises(InvalidInputError):
        power_doppler(s, FrequencyBand(1.1, 1.9))
    with pytest.raises(InvalidInputError):
        power_doppler(s, FrequencyBand(1, 5))


def test_roi_mean_series():
    images = [
        PowerDopplerImage(np.full((3, 3), v), FrequencyBand(1, 2), start, 4, 8.0)
        for v, start in ((1.0, 0), (2.0, 2), (5.0, 4))
    ]
    images[1].m0[1, 1] = 9.0
    t, p = roi_mean_series(images, Roi.from_pixel((3, 3), 1, 1))
    np.testing.assert_allclose(t, [0.25, 0.5, 0.75])
    np.testing.assert_allclose(p, [1, 9, 5])
    t, p = roi_mean_series(images[::2], Roi.from_rect((3, 3), 0, 2, 0, 3))
    np.testing.assert_allclose(p, [1, 5])
    with pytest.raises(InvalidInputError):
        roi_mean_series([], Roi.from_pixel((3, 3), 0, 0))


def test_spectrogram_stationary_tone():
    fs, nt = 32e3, 256
    data = np.broadcast_to(np.exp(2j * np.pi * 4000 * np.arange(nt) / fs), (4, 4, nt)).copy()
    sg = spectrogram(HologramStack(data, fs), Roi.from_pixel((4, 4), 2, 1), plan_windows(nt, 32, 16))
    db, freqs = sg.display()
    assert db.max() == 0.0
    assert freqs[0] == 0 and freqs[-1] == fs / 2
    row = np.argmax(db[:, 0])
    assert freqs[row] == 4000
    assert np.all(db[row] == 0.0)
    assert np.all(np.delete(db, row, axis=0) < -100)
    np.testing.assert_allclose(sg.times, (np.arange(15) * 16 + 16) / fs)


def test_spectrogram_nc_zero_equals_unfiltered(rng):
    stack = HologramStack(random_complex(rng, (6, 6, 96)), 1000.0)
    roi = Roi.disk((6, 6), 3, 3, 2)
    plan = plan_windows(96, 32)
    a = spectrogram(stack, roi, plan)
    b = spectrogram(stack, roi, plan, n_c=0)
    np.testing.assert_allclose(b.power, a.power, rtol=1e-4)
    c = spectrogram(stack, roi, plan, cutoff=100.0)
    assert c.n_c == 6
    assert np.all(c.power.sum(axis=0) < a.power.sum(axis=0))


def test_spectrogram_removes_bursts(reference):
    stack, truth = reference
    roi = Roi.disk(stack.image_shape, 20, 20, 6)
    plan = plan_windows(stack.nt_total, 256, 128)
    raw = spectrogram(stack, roi, plan)
    svd = spectrogram(stack, roi, plan, cutoff=2000.0)
    low = np.abs(raw.freqs - 3000) <= 1000  # around the burst line
    burst = np.array([truth.burst_frames[s:s + 256].all() for s in plan.starts])
    drop = 10 * np.log10(raw.power[low][:, burst].mean() / svd.power[low][:, burst].mean())
    assert drop >= 10


def test_spectrum_shape_mismatch():
    s = DopplerSpectrum(np.ones(4), np.arange(4.0), 4.0)
    assert s.n_t == 4
