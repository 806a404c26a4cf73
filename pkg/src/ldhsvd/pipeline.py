"""Window-by-window power Doppler processing, with or without SVD filtering."""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_positive
from .core import HologramStack, frequency_axis, plan_windows, reshape_to_casorati
from .doppler import FrequencyBand, PowerDopplerImage, Spectrogram, dpsd_window, power_doppler
from .exceptions import InvalidInputError, NumericalFailureError
from .svd import clutter_filter, compute_svd_basis, rank_from_cutoff

__all__ = [
    "PipelineConfig",
    "PowerDopplerMovie",
    "ModeComparison",
    "process_stack",
    "compare_modes",
    "STAGES",
]

MODES = ("fourier", "svd")
STAGES = ("decomposition", "spectrum", "integration")


@dataclass(frozen=True)
class PipelineConfig:
    """Processing parameters.

    With ``mode="svd"`` the clutter rank is ``n_c`` when given, otherwise it
    follows the frequency-equivalent rule with ``cutoff`` (default: the lower
    band edge). ``n_jobs`` bounds how many windows are in flight at once.
    """

    window: int
    band: FrequencyBand
    hop: int = None
    mode: str = "svd"
    n_c: int = None
    cutoff: float = None
    two_sided: bool = True
    taper: str = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.band, FrequencyBand):
            raise InvalidInputError("band must be a FrequencyBand")
        check_positive(self.window, "window", integer=True)
        check_positive(self.n_jobs, "n_jobs", integer=True)
        if self.n_c is not None:
            check_positive(self.n_c, "n_c", integer=True, allow_zero=True)
        if self.cutoff is not None:
            check_positive(self.cutoff, "cutoff", allow_zero=True)

    def plan(self, stack):
        return plan_windows(stack.nt_total, self.window, self.hop, fs=stack.fs)

    def clutter_rank(self, fs):
        """Number of singular components removed per window (0 in Fourier mode)."""
        if self.mode == "fourier":
            return 0
        if self.n_c is not None:
            if self.n_c > self.window:
                raise InvalidInputError(f"n_c = {self.n_c} exceeds window length {self.window}")
            return int(self.n_c)
        f1 = self.band.f1 if self.cutoff is None else self.cutoff
        return rank_from_cutoff(fs, self.window, f1)


@dataclass(frozen=True)
class PowerDopplerMovie:
    """Power Doppler frames, one per window, with per-stage timings in seconds."""

    frames: np.ndarray
    timestamps: np.ndarray
    starts: tuple
    band: FrequencyBand
    mode: str
    n_c: int
    n_t: int
    fs: float
    timings: np.ndarray = field(repr=False, default=None)
    spectrogram: Spectrogram = field(repr=False, default=None)
    series: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def mean_image(self):
        return self.frames.mean(axis=0)

    def images(self):
        return [
            PowerDopplerImage(f, self.band, s, self.n_t, self.fs)
            for f, s in zip(self.frames, self.starts)
        ]

    def phase_mean(self, first, last):
        """Mean of frames ``first..last`` (inclusive window indices)."""
        if not 0 <= first <= last < len(self):
            raise InvalidInputError(f"window range {first}..{last} outside 0..{len(self) - 1}")
        return self.frames[first:last + 1].mean(axis=0)

    def timing_summary(self):
        """Mean and total seconds per stage."""
        t = np.asarray(self.timings)
        return {
            name: {"mean": float(t[:, k].mean()), "total": float(t[:, k].sum())}
            for k, name in enumerate(STAGES)
        }


def _process_window(stack, start, cfg, n_c, roi_idx):
    nx, ny = stack.image_shape
    H = reshape_to_casorati(stack.window(start, cfg.window)).astype(np.complex128, copy=False)

    t0 = time.perf_counter()
    if n_c:
        basis = compute_svd_basis(H, spatial=False)
        H = clutter_filter(H, basis, n_c)
        if not np.all(np.isfinite(H)):
            raise NumericalFailureError("clutter filter produced non-finite values")
    t1 = time.perf_counter()
    spec = dpsd_window(H, stack.fs, window_start=start, taper=cfg.taper)
    t2 = time.perf_counter()
    m0 = power_doppler(spec, cfg.band, two_sided=cfg.two_sided).m0
    if not np.all(np.isfinite(m0)):
        raise NumericalFailureError("power Doppler image is not finite")
    t3 = time.perf_counter()

    roi_dpsd = None if roi_idx is None else spec.values[roi_idx].mean(axis=0)
    image = m0.reshape(ny, nx).T
    return image, roi_dpsd, (t1 - t0, t2 - t1, t3 - t2)


def _run_window(stack, k, start, cfg, n_c, roi_idx):
    try:
        return _process_window(stack, start, cfg, n_c, roi_idx)
    except (InvalidInputError, NumericalFailureError) as exc:
        raise type(exc)(f"window {k} (start frame {start}): {exc}") from exc


def process_stack(stack, cfg, roi=None):
    """Turn a hologram stack into a power Doppler movie.

    For each window: optional SVD clutter filtering, pixel-wise DPSD, band
    integration. With a ``roi`` the movie also carries the ROI-mean series
    and the ROI spectrogram. Windows are processed by up to ``cfg.n_jobs``
    threads and merged in window order.
    """
    if not isinstance(stack, HologramStack):
        raise InvalidInputError("stack must be a HologramStack")
    cfg.band.check_nyquist(stack.fs)
    plan = cfg.plan(stack)
    n_c = cfg.clutter_rank(stack.fs)
    roi_idx = None
    if roi is not None:
        roi.check_shape(stack.image_shape)
        roi_idx = roi.flat_indices()

    results = []
    starts = plan.starts
    if cfg.n_jobs == 1:
        for k, start in enumerate(starts):
            results.append(_run_window(stack, k, start, cfg, n_c, roi_idx))
    else:
        # bounded batches keep at most n_jobs windows resident
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            for b in range(0, len(starts), cfg.n_jobs):
                batch = range(b, min(b + cfg.n_jobs, len(starts)))
                futures = [
                    pool.submit(_run_window, stack, k, starts[k], cfg, n_c, roi_idx)
                    for k in batch
                ]
                results.extend(f.result() for f in futures)

    frames = np.stack([r[0] for r in results])
    timings = np.array([r[2] for r in results])
    spec = series = None
    if roi is not None:
        freqs, _ = frequency_axis(plan.n_t, stack.fs)
        spec = Spectrogram(
            np.stack([r[1] for r in results], axis=1), freqs, plan.center_times(), n_c
        )
        series = frames[:, roi.mask].mean(axis=1)
    return PowerDopplerMovie(
        frames=frames,
        timestamps=plan.center_times(),
        starts=starts,
        band=cfg.band,
        mode=cfg.mode,
        n_c=n_c,
        n_t=plan.n_t,
        fs=stack.fs,
        timings=timings,
        spectrogram=spec,
        series=series,
    )


@dataclass(frozen=True)
class ModeComparison:
    fourier: PowerDopplerMovie
    svd: PowerDopplerMovie
    relative_difference: np.ndarray
    power_ratio: np.ndarray


def compare_modes(stack, cfg, roi=None):
    """Run Fourier-only and SVD processing on the same windows.

    ``relative_difference[k]`` is ``||svd_k - fourier_k||_F / ||fourier_k||_F``
    and ``power_ratio[k]`` the ratio of mean power (over the ROI if given).
    """
    fourier = process_stack(stack, replace(cfg, mode="fourier"), roi)
    svd = process_stack(stack, replace(cfg, mode="svd"), roi)
    diff = svd.frames - fourier.frames
    axes = (1, 2)
    ref = np.linalg.norm(fourier.frames, axis=axes)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.linalg.norm(diff, axis=axes) / ref
        if roi is None:
            ratio = svd.frames.mean(axis=axes) / fourier.frames.mean(axis=axes)
        else:
            ratio = svd.series / fourier.series
    return ModeComparison(fourier, svd, rel, ratio)
