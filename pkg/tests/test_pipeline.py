import numpy as np
import pytest

from conftest import FS, random_complex
from ldhsvd import (
    FrequencyBand,
    HologramStack,
    InvalidInputError,
    NumericalFailureError,
    PipelineConfig,
    Roi,
    compare_modes,
    process_stack,
)
from ldhsvd.synth import ground_truth_band_power

BAND = FrequencyBand(2000, 6000)


def pearson(a, b):
    return np.corrcoef(np.ravel(a), np.ravel(b))[0, 1]


@pytest.fixture
def small(rng):
    return HologramStack(random_complex(rng, (10, 8, 200)), 8000.0)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        PipelineConfig(64, BAND, mode="music")
    with pytest.raises(InvalidInputError):
        PipelineConfig(64, (2000, 6000))
    with pytest.raises(InvalidInputError):
        PipelineConfig(0, BAND)
    with pytest.raises(InvalidInputError):
        PipelineConfig(64, BAND, n_c=65).clutter_rank(FS)


def test_clutter_rank_rules():
    assert PipelineConfig(1024, BAND, mode="fourier", n_c=5).clutter_rank(FS) == 0
    assert PipelineConfig(1024, BAND).clutter_rank(FS) == 68
    assert PipelineConfig(1024, BAND, cutoff=0).clutter_rank(FS) == 0
    assert PipelineConfig(1024, BAND, n_c=34).clutter_rank(75e3) == 34


def test_movie_layout(small):
    band = FrequencyBand(500, 2000)
    movie = process_stack(small, PipelineConfig(64, band, hop=32))
    assert movie.frames.shape == (5, 10, 8)
    assert movie.starts == (0, 32, 64, 96, 128)
    assert np.all(np.diff(movie.timestamps) > 0)
    np.testing.assert_allclose(movie.timestamps, (np.array(movie.starts) + 32) / 8000.0)
    assert movie.n_c == 8
    assert movie.timings.shape == (5, 3)
    assert set(movie.timing_summary()) == {"decomposition", "spectrum", "integration"}
    np.testing.assert_allclose(movie.mean_image, movie.frames.mean(axis=0))
    imgs = movie.images()
    assert imgs[2].timestamp == pytest.approx(movie.timestamps[2])
    np.testing.assert_array_equal(movie.phase_mean(1, 2), movie.frames[1:3].mean(axis=0))
    with pytest.raises(InvalidInputError):
        movie.phase_mean(3, 5)


def test_frames_match_direct_computation(small):
    from ldhsvd import compute_svd_basis, clutter_filter, dpsd_window, power_doppler
    from ldhsvd.core import reshape_to_casorati

    band = FrequencyBand(500, 2000)
    movie = process_stack(small, PipelineConfig(64, band, hop=64, n_c=3))
    H = reshape_to_casorati(small.window(64, 64))
    Hf = clutter_filter(H, compute_svd_basis(H), 3)
    m0 = power_doppler(dpsd_window(Hf, small.fs), band).m0
    np.testing.assert_allclose(movie.frames[1], m0.reshape(8, 10).T, rtol=1e-10)


def test_svd_with_zero_rank_equals_fourier(small):
    band = FrequencyBand(500, 2000)
    cmp = compare_modes(small, PipelineConfig(64, band, n_c=0))
    np.testing.assert_allclose(cmp.svd.frames, cmp.fourier.frames, rtol=1e-4)
    assert np.all(cmp.relative_difference <= 1e-4)
    np.testing.assert_allclose(cmp.power_ratio, 1.0, rtol=1e-4)


def test_roi_products(small):
    roi = Roi.from_rect(small.image_shape, 2, 5, 1, 3)
    movie = process_stack(small, PipelineConfig(64, FrequencyBand(500, 2000)), roi=roi)
    np.testing.assert_allclose(movie.series, movie.frames[:, roi.mask].mean(axis=1))
    assert movie.spectrogram.power.shape == (64, len(movie))
    assert movie.spectrogram.n_c == movie.n_c


def test_determinism_and_parallel_equivalence(small):
    cfg = PipelineConfig(48, FrequencyBand(500, 2000), hop=16, n_c=4)
    a = process_stack(small, cfg)
    b = process_stack(small, cfg)
    c = process_stack(small, PipelineConfig(48, FrequencyBand(500, 2000), hop=16, n_c=4, n_jobs=3))
    np.testing.assert_array_equal(a.frames, b.frames)
    np.testing.assert_allclose(c.frames, a.frames, rtol=1e-12)


def test_errors_carry_window_index(small):
    with pytest.raises(InvalidInputError, match="window 0"):
        # 96 frames but only 80 pixels: the SVD needs rows >= columns
        process_stack(small, PipelineConfig(96, FrequencyBand(500, 2000), n_c=2))


def test_band_above_nyquist(small):
    with pytest.raises(InvalidInputError):
        process_stack(small, PipelineConfig(32, FrequencyBand(500, 5000)))


def test_rejects_non_stack():
    with pytest.raises(InvalidInputError):
        process_stack(np.zeros((4, 4, 8)), PipelineConfig(4, BAND))


def test_numerical_failure_is_a_distinct_error():
    assert not issubclass(NumericalFailureError, InvalidInputError)


def test_no_clutter_modes_agree(clutter_free):
    stack, truth = clutter_free
    cmp = compare_modes(stack, PipelineConfig(256, BAND))
    f, s = cmp.fourier.mean_image, cmp.svd.mean_image
    vessel = truth.vessel_mask
    median = np.median(np.abs(s[vessel] - f[vessel]) / f[vessel])
    assert median < 0.05
    assert np.median(cmp.relative_difference) < 0.2


def test_clutter_lowers_fourier_correlation(reference):
    stack, truth = reference
    cmp = compare_modes(stack, PipelineConfig(256, BAND))
    gt = ground_truth_band_power(truth, BAND)
    assert pearson(cmp.svd.mean_image, gt) > pearson(cmp.fourier.mean_image, gt)


def test_difference_spikes_on_burst_windows(reference):
    stack, truth = reference
    cmp = compare_modes(stack, PipelineConfig(256, BAND))
    burst = np.array([truth.burst_frames[s:s + 256].any() for s in cmp.svd.starts])
    assert cmp.relative_difference[burst].min() > cmp.relative_difference[~burst].max()
