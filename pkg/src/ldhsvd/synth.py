"""Synthetic hologram stacks with known ground truth.

A scene is the sum of up to five components, each drawn from its own seeded
stream so that components can be generated separately and summed:

* ``background``: complex Gaussian speckle, frozen in time by default; a
  non-zero ``background_width_hz`` lets every pixel decorrelate slowly and
  independently (mild tissue motion);
* ``blood``: per-pixel independent complex AR(1) processes inside disk-shaped
  vessels. The autocorrelation ``a**|k|`` with ``a = exp(-2 pi width / fs)``
  gives a Lorentzian-type Doppler spectrum of half-width ``width`` Hz;
* ``clutter``: bursts of a narrowband tone shared by every pixel through one
  spatial pattern, hence exactly rank one per burst;
* ``jitter``: a separable ring-shaped diffraction pattern gated by a
  high-pass pseudo-random sequence;
* ``noise``: optional white complex noise.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.signal.windows import tukey

from ._validation import check_positive
from .core import HologramStack
from .doppler import FrequencyBand
from .exceptions import FormatError, InvalidInputError

__all__ = [
    "Vessel",
    "ClutterBurst",
    "Jitter",
    "SynthScene",
    "GroundTruth",
    "generate_stack",
    "ground_truth_band_power",
    "lorentzian_band_fraction",
    "parse_scene",
    "load_scene",
    "dump_scene",
    "COMPONENTS",
]

COMPONENTS = ("background", "blood", "clutter", "jitter", "noise")
PATTERNS = ("uniform", "smooth", "speckle")
_STREAM = {name: k for k, name in enumerate(COMPONENTS)}
_BLOCK = 1024  # frames per block when adding rank-one components


@dataclass(frozen=True)
class Vessel:
    """Disk of flowing blood; ``power`` is the mean per-frame power.

    A pulse modulates the power by ``1 + depth * cos(2 pi pulse_hz t + phase)``.
    ``width_hz = inf`` gives a white spectrum, ``0`` a static signal.
    """

    cx: float
    cy: float
    radius: float
    width_hz: float
    power: float = 1.0
    pulse_hz: float = 0.0
    pulse_depth: float = 0.0
    pulse_phase: float = 0.0

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 + self.pulse_depth * np.cos(2 * np.pi * self.pulse_hz * t + self.pulse_phase)


@dataclass(frozen=True)
class ClutterBurst:
    """Tone at ``freq_hz`` over frames ``[start, start + duration)`` with rms ``amplitude``."""

    start: int
    duration: int
    freq_hz: float
    amplitude: float
    pattern: str = "uniform"


@dataclass(frozen=True)
class Jitter:
    """Ring pattern centred on pixel ``(x, y)`` gated by noise above ``f_lo`` Hz."""

    x: float
    y: float
    scale: float
    amplitude: float
    f_lo: float = 6000.0


@dataclass(frozen=True)
class SynthScene:
    nx: int
    ny: int
    nt_total: int
    fs: float
    vessels: tuple = ()
    bursts: tuple = ()
    jitter: Jitter = None
    background: float = 0.0
    noise: float = 0.0
    seed: int = 0
    background_width_hz: float = 0.0

    def __post_init__(self):
        for name in ("nx", "ny", "nt_total"):
            check_positive(getattr(self, name), name, integer=True)
        check_positive(self.fs, "fs")
        check_positive(self.background, "background", allow_zero=True)
        check_positive(self.noise, "noise", allow_zero=True)
        check_positive(self.background_width_hz, "background_width_hz", allow_zero=True)
        check_positive(self.seed, "seed", integer=True, allow_zero=True)
        object.__setattr__(self, "vessels", tuple(self.vessels))
        object.__setattr__(self, "bursts", tuple(self.bursts))
        nyq = self.fs / 2
        if self.background_width_hz > nyq:
            raise InvalidInputError("background width above Nyquist")
        for v in self.vessels:
            if not (v.width_hz >= 0 and v.power >= 0 and v.radius >= 0):
                raise InvalidInputError(f"invalid vessel {v}")
            if not 0 <= v.pulse_depth <= 1:
                raise InvalidInputError("pulse depth must lie in [0, 1]")
            if math.isfinite(v.width_hz) and v.width_hz > nyq:
                raise InvalidInputError(f"vessel width {v.width_hz} Hz above Nyquist {nyq} Hz")
            if abs(v.pulse_hz) > nyq:
                raise InvalidInputError(f"pulse rate {v.pulse_hz} Hz above Nyquist")
        for b in self.bursts:
            if abs(b.freq_hz) > nyq:
                raise InvalidInputError(f"burst frequency {b.freq_hz} Hz above Nyquist {nyq} Hz")
            if b.amplitude < 0:
                raise InvalidInputError("burst amplitude must be >= 0")
            if b.pattern not in PATTERNS:
                raise InvalidInputError(f"burst pattern must be one of {PATTERNS}")
            if b.start < 0 or b.duration < 1 or b.start + b.duration > self.nt_total:
                raise InvalidInputError(f"burst {b} does not fit in {self.nt_total} frames")
        j = self.jitter
        if j is not None:
            if j.amplitude < 0 or j.scale <= 0:
                raise InvalidInputError(f"invalid jitter {j}")
            if not 0 <= j.f_lo < nyq:
                raise InvalidInputError(f"jitter cutoff {j.f_lo} Hz outside [0, Nyquist)")

    @property
    def shape(self):
        return (self.nx, self.ny)

    def vessel_labels(self):
        """Index of the vessel covering each pixel, -1 elsewhere; later vessels win."""
        labels = np.full(self.shape, -1, dtype=int)
        x, y = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        for k, v in enumerate(self.vessels):
            labels[(x - v.cx) ** 2 + (y - v.cy) ** 2 <= v.radius ** 2] = k
        return labels

    def times(self):
        return np.arange(self.nt_total) / self.fs


@dataclass(frozen=True)
class GroundTruth:
    """What the generator put in: blood parameters per pixel and clutter timing."""

    fs: float
    labels: np.ndarray
    width_map: np.ndarray
    power_map: np.ndarray
    bursts: tuple
    burst_frames: np.ndarray
    jitter_pattern: np.ndarray = field(default=None, repr=False)
    vessels: tuple = ()

    @property
    def vessel_mask(self):
        return self.labels >= 0

    def envelope(self, k, t):
        """Power envelope of vessel ``k`` at times ``t`` (seconds)."""
        return self.vessels[k].envelope(t)


def _rng(seed, component, *extra):
    return np.random.default_rng(np.random.SeedSequence([seed, _STREAM[component], *extra]))


def _cn(rng, shape):
    """Unit-power circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _ar1_coefficient(width_hz, fs):
    if width_hz == 0:
        return 1.0
    if not math.isfinite(width_hz):
        return 0.0
    return math.exp(-2 * math.pi * width_hz / fs)


def _blood_signal(rng, n_pix, nt, a, power):
    """Stationary complex AR(1) rows of mean power ``power``."""
    x_prev = _cn(rng, (n_pix, 1)) * np.sqrt(power)
    if a == 1.0:
        return np.repeat(x_prev, nt, axis=1)
    w = _cn(rng, (n_pix, nt))
    gain = np.sqrt(power * (1 - a * a))
    return lfilter([gain], [1.0, -a], w, axis=1, zi=a * x_prev)[0]


def _clutter_pattern(scene, k, pattern):
    if pattern == "uniform":
        return np.ones(scene.shape, dtype=np.complex128)
    rng = _rng(scene.seed, "clutter", k)
    if pattern == "speckle":
        s = _cn(rng, scene.shape)
    else:
        # smooth: unit modulus, quadratic phase with random coefficients
        x, y = np.meshgrid(
            np.linspace(-1, 1, scene.nx), np.linspace(-1, 1, scene.ny), indexing="ij"
        )
        c = rng.uniform(-np.pi, np.pi, 5)
        s = np.exp(1j * (c[0] * x + c[1] * y + c[2] * x * x + c[3] * y * y + c[4] * x * y))
    return s / np.sqrt(np.mean(np.abs(s) ** 2))


def _burst_signal(scene, b):
    t = np.arange(b.duration)
    taper = tukey(b.duration, alpha=0.2) if b.duration > 2 else np.ones(b.duration)
    sig = np.zeros(scene.nt_total, dtype=np.complex128)
    sig[b.start:b.start + b.duration] = (
        b.amplitude * taper * np.exp(2j * np.pi * b.freq_hz * t / scene.fs)
    )
    return sig


def jitter_pattern(scene):
    """Real ring pattern ``sinc(r / scale)`` around the jitter centre, peak 1."""
    j = scene.jitter
    x, y = np.meshgrid(np.arange(scene.nx), np.arange(scene.ny), indexing="ij")
    r = np.hypot(x - j.x, y - j.y)
    return np.sinc(r / j.scale)


def _jitter_gate(scene):
    j = scene.jitter
    rng = _rng(scene.seed, "jitter")
    g = _cn(rng, scene.nt_total)
    f = np.fft.fftfreq(scene.nt_total, d=1.0 / scene.fs)
    spec = np.fft.fft(g)
    spec[np.abs(f) < j.f_lo] = 0
    g = np.fft.ifft(spec)
    rms = np.sqrt(np.mean(np.abs(g) ** 2))
    return g / rms if rms > 0 else g


def _add_rank_one(data, patterns, signals):
    """``data += patterns @ signals`` over the flattened pixels, block by block."""
    P = patterns.reshape(-1, patterns.shape[-1])
    nt = data.shape[-1]
    flat = data.reshape(-1, nt)
    active = np.flatnonzero(np.any(signals != 0, axis=0))
    if active.size == 0:
        return
    lo, hi = active[0], active[-1] + 1
    for b0 in range(lo, hi, _BLOCK):
        b1 = min(b0 + _BLOCK, hi)
        flat[:, b0:b1] += P @ signals[:, b0:b1]


def generate_stack(scene, components=None):
    """Render ``scene`` into a complex128 stack and its ground truth.

    ``components`` restricts the output to a subset of :data:`COMPONENTS`;
    summing the separately generated components reproduces the joint stack
    exactly.
    """
    if components is None:
        components = COMPONENTS
    unknown = set(components) - set(COMPONENTS)
    if unknown:
        raise InvalidInputError(f"unknown components {sorted(unknown)}")

    nx, ny, nt = scene.nx, scene.ny, scene.nt_total
    data = np.zeros((nx, ny, nt), dtype=np.complex128)
    labels = scene.vessel_labels()
    times = scene.times()

    if "background" in components and scene.background > 0:
        rng = _rng(scene.seed, "background")
        if scene.background_width_hz == 0:
            field_ = _cn(rng, scene.shape) * scene.background
            data += field_[:, :, None]
        else:
            a = _ar1_coefficient(scene.background_width_hz, scene.fs)
            rows = _blood_signal(rng, nx * ny, nt, a, scene.background ** 2)
            data += rows.reshape(nx, ny, nt)

    if "blood" in components:
        for k, v in enumerate(scene.vessels):
            mask = labels == k
            n_pix = int(mask.sum())
            if n_pix == 0 or v.power == 0:
                continue
            a = _ar1_coefficient(v.width_hz, scene.fs)
            rows = _blood_signal(_rng(scene.seed, "blood", k), n_pix, nt, a, v.power)
            if v.pulse_depth > 0:
                rows = rows * np.sqrt(v.envelope(times))
            data[mask] += rows

    if "clutter" in components and scene.bursts:
        patterns = np.stack(
            [_clutter_pattern(scene, k, b.pattern) for k, b in enumerate(scene.bursts)], axis=-1
        )
        signals = np.stack([_burst_signal(scene, b) for b in scene.bursts])
        _add_rank_one(data, patterns, signals)

    jit = None
    if scene.jitter is not None:
        jit = jitter_pattern(scene)
        if "jitter" in components and scene.jitter.amplitude > 0:
            gate = _jitter_gate(scene) * scene.jitter.amplitude
            _add_rank_one(data, jit[:, :, None].astype(np.complex128), gate[None, :])

    if "noise" in components and scene.noise > 0:
        data += _cn(_rng(scene.seed, "noise"), data.shape) * scene.noise

    width = np.zeros(scene.shape)
    power = np.zeros(scene.shape)
    for k, v in enumerate(scene.vessels):
        width[labels == k] = v.width_hz
        power[labels == k] = v.power
    burst_frames = np.zeros(nt, dtype=bool)
    for b in scene.bursts:
        burst_frames[b.start:b.start + b.duration] = True
    truth = GroundTruth(
        fs=scene.fs,
        labels=labels,
        width_map=width,
        power_map=power,
        bursts=scene.bursts,
        burst_frames=burst_frames,
        jitter_pattern=jit,
        vessels=scene.vessels,
    )
    return HologramStack(data, scene.fs), truth


def _cumulative_fraction(f, width_hz, fs):
    """Share of an AR(1) process's power with ``|frequency| <= f``."""
    omega = 2 * np.pi * np.clip(f, 0, fs / 2) / fs
    a = _ar1_coefficient(width_hz, fs)
    if a == 1.0:
        return np.ones_like(omega)
    c = (1 + a) / (1 - a)
    # arctan of tan(pi/2) must land exactly on pi/2
    half = omega / 2
    out = np.where(
        np.isclose(half, np.pi / 2), 0.5 * np.pi, np.arctan(c * np.tan(np.minimum(half, np.pi / 2)))
    )
    return 2 / np.pi * out


def lorentzian_band_fraction(width_hz, fs, band, two_sided=True):
    """Fraction of an AR(1) blood signal's power inside ``band``.

    The discrete-time spectrum is ``(1 - a^2) / |1 - a e^{-i omega}|^2``, whose
    integral has the closed form ``2 arctan(c tan(omega / 2))`` with
    ``c = (1 + a) / (1 - a)``.
    """
    band.check_nyquist(fs)
    if width_hz == 0:
        return 1.0 if band.f1 == 0 else 0.0
    frac = _cumulative_fraction(band.f2, width_hz, fs) - _cumulative_fraction(band.f1, width_hz, fs)
    frac = float(frac)
    return frac if two_sided else frac / 2


def ground_truth_band_power(truth, band, two_sided=True):
    """Expected per-frame blood power inside ``band`` at every pixel."""
    if not isinstance(band, FrequencyBand):
        band = FrequencyBand(*band)
    out = np.zeros(truth.width_map.shape)
    for k, v in enumerate(truth.vessels):
        mask = truth.labels == k
        if mask.any():
            out[mask] = v.power * lorentzian_band_fraction(v.width_hz, truth.fs, band, two_sided)
    return out


# --- scene description files -------------------------------------------------

_SCALARS = {
    "nx": int,
    "ny": int,
    "nt_total": int,
    "fs": float,
    "seed": int,
    "background": float,
    "noise": float,
    "background_width_hz": float,
}


def _numbers(values, lineno, fields, minimum):
    if not minimum <= len(values) <= len(fields):
        raise FormatError(f"expected {minimum} to {len(fields)} values", lineno)
    try:
        return [t(v) for t, v in zip(fields, values)]
    except ValueError as exc:
        raise FormatError(str(exc), lineno) from exc


def parse_scene(text):
    """Parse the ``key = value`` scene format (see README for the keys)."""
    scalars, vessels, bursts, jitter = {}, [], [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected 'key = value', got {raw!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        parts = value.split()
        if key in _SCALARS:
            try:
                scalars[key] = _SCALARS[key](value)
            except ValueError as exc:
                raise FormatError(f"bad value for {key}: {exc}", lineno) from exc
        elif key == "vessel":
            vessels.append(Vessel(*_numbers(parts, lineno, [float] * 8, 4)))
        elif key == "burst":
            nums = _numbers(parts[:4], lineno, [int, int, float, float], 4)
            pattern = parts[4] if len(parts) > 4 else "uniform"
            if len(parts) > 5:
                raise FormatError("too many values for burst", lineno)
            bursts.append(ClutterBurst(*nums, pattern))
        elif key == "jitter":
            jitter = Jitter(*_numbers(parts, lineno, [float] * 5, 4))
        else:
            raise FormatError(f"unknown key {key!r}", lineno)
    missing = [k for k in ("nx", "ny", "nt_total", "fs") if k not in scalars]
    if missing:
        raise FormatError(f"missing keys: {', '.join(missing)}")
    return SynthScene(vessels=tuple(vessels), bursts=tuple(bursts), jitter=jitter, **scalars)


def load_scene(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scene(fh.read())


def dump_scene(scene):
    """Inverse of :func:`parse_scene`."""
    lines = [f"{k} = {getattr(scene, k)!r}" for k in _SCALARS]
    for v in scene.vessels:
        lines.append(
            "vessel = "
            + " ".join(
                repr(float(x))
                for x in (v.cx, v.cy, v.radius, v.width_hz, v.power,
                          v.pulse_hz, v.pulse_depth, v.pulse_phase)
            )
        )
    for b in scene.bursts:
        lines.append(f"burst = {b.start} {b.duration} {b.freq_hz!r} {b.amplitude!r} {b.pattern}")
    if scene.jitter is not None:
        j = scene.jitter
        lines.append(f"jitter = {j.x!r} {j.y!r} {j.scale!r} {j.amplitude!r} {j.f_lo!r}")
    return "\n".join(lines) + "\n"
