"""Doppler power spectra, band-integrated power Doppler and spectrograms."""
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from ._validation import check_complex_array, check_positive
from .core import HologramStack, frequency_axis, reshape_to_casorati
from .exceptions import InvalidInputError
from .svd import clutter_filter, compute_svd_basis, rank_from_cutoff

__all__ = [
    "FrequencyBand",
    "DopplerSpectrum",
    "PowerDopplerImage",
    "Spectrogram",
    "dpsd_window",
    "power_doppler",
    "band_mask",
    "roi_mean_series",
    "spectrogram",
]


@dataclass(frozen=True)
class FrequencyBand:
    """Doppler band ``[f1, f2)`` in Hz, applied to ``|f|`` by default."""

    f1: float
    f2: float

    def __post_init__(self):
        check_positive(self.f1, "f1", allow_zero=True)
        check_positive(self.f2, "f2")
        if not self.f1 < self.f2:
            raise InvalidInputError(f"band needs f1 < f2, got {self.f1}:{self.f2}")

    def check_nyquist(self, fs):
        if self.f2 > fs / 2 * (1 + 1e-12):
            raise InvalidInputError(f"band {self} exceeds Nyquist ({fs / 2} Hz)")

    @classmethod
    def parse(cls, text):
        """Parse ``"F1:F2"`` in Hz; a ``k`` suffix means kHz (``"2k:6k"``)."""
        try:
            lo, hi = text.split(":")
            return cls(_parse_hz(lo), _parse_hz(hi))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse band {text!r}: {exc}") from exc

    def __str__(self):
        return f"{self.f1:g}:{self.f2:g}"


def _parse_hz(token):
    token = token.strip().lower()
    scale = 1.0
    if token.endswith("khz"):
        token, scale = token[:-3], 1e3
    elif token.endswith("k"):
        token, scale = token[:-1], 1e3
    elif token.endswith("hz"):
        token = token[:-2]
    return float(token) * scale


@dataclass(frozen=True)
class DopplerSpectrum:
    """Power per frequency bin; the last axis of ``values`` follows ``freqs``."""

    values: np.ndarray
    freqs: np.ndarray
    fs: float
    window_start: int = 0

    @property
    def n_t(self):
        return self.freqs.shape[0]


@dataclass(frozen=True)
class PowerDopplerImage:
    m0: np.ndarray
    band: FrequencyBand
    window_start: int = 0
    n_t: int = None
    fs: float = None

    @property
    def timestamp(self):
        """Window centre in seconds."""
        if self.n_t is None or self.fs is None:
            raise InvalidInputError("image lacks window length or sampling frequency")
        return (self.window_start + self.n_t / 2) / self.fs


def _taper(name, n_t):
    if name is None:
        return None
    if isinstance(name, str):
        if name in ("rect", "rectangular", "boxcar"):
            return None
        try:
            return get_window(name, n_t, fftbins=True)
        except ValueError as exc:
            raise InvalidInputError(f"unknown taper {name!r}") from exc
    w = np.asarray(name, dtype=float)
    if w.shape != (n_t,):
        raise InvalidInputError(f"taper must have length {n_t}")
    return w


def dpsd_window(window, fs, window_start=0, taper=None):
    """Squared magnitude of the unnormalised DFT of every pixel's signal.

    ``window`` may be a ``(nx, ny, n_t)`` stack slice, an ``(n_pixels, n_t)``
    Casorati matrix or a single ``(n_t,)`` signal; time is always the last
    axis. No taper is applied by default, in which case
    ``sum_f S(f) == n_t * sum_t |h(t)|^2``.
    """
    if isinstance(window, HologramStack):
        window = window.data
    h = check_complex_array(window, name="window")
    if h.ndim > 3:
        raise InvalidInputError(f"window has too many axes: {h.shape}")
    check_positive(fs, "fs")
    n_t = h.shape[-1]
    if n_t < 2:
        raise InvalidInputError("DPSD needs at least 2 frames")
    w = _taper(taper, n_t)
    if w is not None:
        h = h * w
    freqs, order = frequency_axis(n_t, fs)
    spec = np.fft.fft(h, axis=-1)
    power = spec.real ** 2 + spec.imag ** 2
    return DopplerSpectrum(power[..., order], freqs, float(fs), int(window_start))


def band_mask(freqs, band, fs, two_sided=True):
    """Bins with ``f1 <= |f| < f2``; ``f2`` itself is kept when it is Nyquist."""
    band.check_nyquist(fs)
    f = np.abs(freqs) if two_sided else np.asarray(freqs)
    upper = f <= band.f2 if np.isclose(band.f2, fs / 2, rtol=1e-12, atol=0) else f < band.f2
    return (f >= band.f1) & upper


def power_doppler(s, band, two_sided=True):
    """Integrate a Doppler spectrum over a band: ``sum S(f) * fs / n_t``.

    Both sidebands contribute unless ``two_sided=False``.
    """
    mask = band_mask(s.freqs, band, s.fs, two_sided=two_sided)
    if not mask.any():
        raise InvalidInputError(f"band {band} Hz contains no frequency bin")
    df = s.fs / s.n_t
    m0 = s.values[..., mask].sum(axis=-1) * df
    return PowerDopplerImage(m0, band, s.window_start, s.n_t, s.fs)


def roi_mean_series(movie, roi):
    """Mean power over the ROI for each image of a movie.

    Returns ``(times, power)`` with times at window centres in seconds.
    """
    frames = list(movie)
    if not frames:
        raise InvalidInputError("movie is empty")
    shape = frames[0].m0.shape
    roi.check_shape(shape)
    times = np.empty(len(frames))
    power = np.empty(len(frames))
    for k, img in enumerate(frames):
        if img.m0.shape != shape:
            raise InvalidInputError(f"frame {k} has shape {img.m0.shape}, expected {shape}")
        times[k] = img.timestamp
        power[k] = img.m0[roi.mask].mean()
    return times, power


@dataclass(frozen=True)
class Spectrogram:
    """ROI-averaged DPSD per window (columns), full two-sided frequency axis."""

    power: np.ndarray
    freqs: np.ndarray
    times: np.ndarray
    n_c: int = 0

    def display(self, floor_db=-300.0):
        """``(db, freqs)`` for the non-negative rows, 0 dB at the global maximum."""
        keep = self.freqs >= 0
        p = self.power[keep]
        peak = p.max()
        if not peak > 0:
            raise InvalidInputError("spectrogram carries no power")
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(p / peak)
        return np.maximum(db, floor_db), self.freqs[keep]

    @property
    def db(self):
        return self.display()[0]


def roi_spectrum(window, roi, fs, n_c=0, window_start=0, taper=None):
    """ROI-mean DPSD of one ``(nx, ny, n_t)`` window, optionally SVD-filtered.

    The SVD basis is computed from the whole field; only ROI rows are
    filtered and transformed.
    """
    H = reshape_to_casorati(window)
    idx = roi.flat_indices()
    rows = H[idx].astype(np.complex128)
    if n_c:
        basis = compute_svd_basis(H, spatial=False)
        rows = clutter_filter(rows, basis, n_c)
    s = dpsd_window(rows, fs, window_start=window_start, taper=taper)
    return DopplerSpectrum(s.values.mean(axis=0), s.freqs, s.fs, window_start)


def spectrogram(stack, roi, plan, n_c=None, cutoff=None, taper=None):
    """Spectrogram of the ROI-averaged DPSD over the windows of ``plan``.

    Give ``n_c`` for an explicit clutter rank or ``cutoff`` (Hz) to derive it
    from the frequency-equivalent rule; neither means no SVD filtering.
    """
    roi.check_shape(stack.image_shape)
    if plan.starts and plan.starts[-1] + plan.n_t > stack.nt_total:
        raise InvalidInputError("window plan does not fit the stack")
    if n_c is None:
        n_c = 0 if cutoff is None else rank_from_cutoff(stack.fs, plan.n_t, cutoff)
    columns = []
    for start in plan.starts:
        s = roi_spectrum(stack.window(start, plan.n_t), roi, stack.fs, n_c, start, taper)
        columns.append(s.values)
    freqs, _ = frequency_axis(plan.n_t, stack.fs)
    times = (np.asarray(plan.starts, dtype=float) + plan.n_t / 2) / stack.fs
    return Spectrogram(np.stack(columns, axis=1), freqs, times, int(n_c))
