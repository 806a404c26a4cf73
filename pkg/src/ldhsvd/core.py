"""Hologram data model, space-time reshaping and the sliding-window schedule.

Arrays follow the ``(nx, ny, nt)`` axis order. The space-time (Casorati)
matrix has one row per pixel and one column per frame; pixels are flattened
row-major over ``(y, x)``, i.e. pixel ``p = y * nx + x``. The same order is
used by the stack file payload, so a frame written to disk and a Casorati
column have identical layouts.
"""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_mask, check_positive
from .exceptions import InvalidInputError

__all__ = [
    "HologramStack",
    "WindowPlan",
    "Roi",
    "reshape_to_casorati",
    "reshape_from_casorati",
    "plan_windows",
    "frequency_axis",
]


@dataclass(frozen=True)
class HologramStack:
    """Time series of complex holograms sampled at ``fs`` Hz.

    ``data`` has shape ``(nx, ny, nt_total)``. The array is stored as a
    read-only view; real input is promoted to complex128, complex64 input is
    kept as is.
    """

    data: np.ndarray
    fs: float

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise InvalidInputError(f"stack data must be 3-D (nx, ny, nt), got {arr.shape}")
        if 0 in arr.shape:
            raise InvalidInputError(f"stack has an empty axis: {arr.shape}")
        if not np.iscomplexobj(arr):
            if not np.issubdtype(arr.dtype, np.number):
                raise InvalidInputError(f"stack data must be numeric, got {arr.dtype}")
            arr = arr.astype(np.complex128)
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("stack data contains non-finite values")
        check_positive(self.fs, "fs")
        view = arr.view()
        view.flags.writeable = False
        object.__setattr__(self, "data", view)
        object.__setattr__(self, "fs", float(self.fs))

    @property
    def nx(self):
        return self.data.shape[0]

    @property
    def ny(self):
        return self.data.shape[1]

    @property
    def nt_total(self):
        return self.data.shape[2]

    @property
    def image_shape(self):
        return self.data.shape[:2]

    def window(self, start, n_t):
        """Frames ``start .. start + n_t - 1`` as a ``(nx, ny, n_t)`` view."""
        if start < 0 or n_t < 1 or start + n_t > self.nt_total:
            raise InvalidInputError(
                f"window [{start}, {start + n_t}) outside stack of {self.nt_total} frames"
            )
        return self.data[:, :, start:start + n_t]

    def casorati(self, start, n_t):
        return reshape_to_casorati(self.window(start, n_t))


@dataclass(frozen=True)
class WindowPlan:
    """Start frames of the short-time windows over a stack."""

    n_t: int
    hop: int
    starts: tuple
    fs: float = None

    @property
    def t_win(self):
        """Window duration in seconds, or None when fs is unknown."""
        return None if self.fs is None else self.n_t / self.fs

    @property
    def n_windows(self):
        return len(self.starts)

    def center_times(self):
        """Timestamp of each window centre in seconds."""
        if self.fs is None:
            raise InvalidInputError("plan has no sampling frequency")
        return (np.asarray(self.starts, dtype=float) + self.n_t / 2) / self.fs


def plan_windows(nt_total, n_t, hop=None, fs=None):
    """Schedule windows of ``n_t`` frames advancing by ``hop`` (default ``n_t // 2``).

    Trailing frames that cannot fill a whole window are dropped.

    >>> plan_windows(2048, 1024).starts
    (0, 512, 1024)
    """
    check_positive(nt_total, "nt_total", integer=True)
    check_positive(n_t, "n_t", integer=True)
    if hop is None:
        hop = max(n_t // 2, 1)
    check_positive(hop, "hop", integer=True)
    if n_t > nt_total:
        raise InvalidInputError(f"window length {n_t} exceeds stack length {nt_total}")
    if hop > n_t:
        raise InvalidInputError(f"hop {hop} exceeds window length {n_t}")
    if fs is not None:
        check_positive(fs, "fs")
        fs = float(fs)
    starts = tuple(range(0, nt_total - n_t + 1, hop))
    return WindowPlan(n_t=int(n_t), hop=int(hop), starts=starts, fs=fs)


@dataclass(frozen=True)
class Roi:
    """Boolean pixel mask of shape ``(nx, ny)``."""

    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.mask)
        if m.ndim != 2:
            raise InvalidInputError(f"ROI mask must be 2-D, got shape {m.shape}")
        m = check_mask(m, m.shape, name="ROI mask")
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def n_pixels(self):
        return int(self.mask.sum())

    def check_shape(self, shape):
        if self.mask.shape != tuple(shape):
            raise InvalidInputError(
                f"ROI shape {self.mask.shape} does not match image shape {tuple(shape)}"
            )

    def flat_indices(self):
        """Casorati row indices of the ROI pixels."""
        return np.flatnonzero(self.mask.T.ravel())

    @classmethod
    def from_pixel(cls, shape, x, y):
        m = np.zeros(shape, dtype=bool)
        m[x, y] = True
        return cls(m)

    @classmethod
    def from_rect(cls, shape, x0, x1, y0, y1):
        """Half-open rectangle ``[x0, x1) x [y0, y1)``."""
        m = np.zeros(shape, dtype=bool)
        m[x0:x1, y0:y1] = True
        return cls(m)

    @classmethod
    def disk(cls, shape, cx, cy, radius):
        x, y = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
        return cls((x - cx) ** 2 + (y - cy) ** 2 <= radius ** 2)


def _as_window_array(window):
    if isinstance(window, HologramStack):
        return window.data
    arr = np.asarray(window)
    if arr.ndim != 3:
        raise InvalidInputError(f"window must be 3-D (nx, ny, n_t), got shape {arr.shape}")
    if 0 in arr.shape:
        raise InvalidInputError(f"window has an empty axis: {arr.shape}")
    return arr


def reshape_to_casorati(window):
    """Flatten a ``(nx, ny, n_t)`` window into an ``(nx * ny, n_t)`` matrix.

    Column ``j`` is frame ``j`` flattened with pixel index ``y * nx + x``.
    The dtype is preserved, so the inverse reshape is bit-exact.
    """
    arr = _as_window_array(window)
    nx, ny, n_t = arr.shape
    return np.ascontiguousarray(arr.transpose(1, 0, 2).reshape(ny * nx, n_t))


def reshape_from_casorati(m, nx, ny):
    """Inverse of :func:`reshape_to_casorati`."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise InvalidInputError(f"Casorati matrix must be 2-D, got shape {arr.shape}")
    check_positive(nx, "nx", integer=True)
    check_positive(ny, "ny", integer=True)
    if arr.shape[0] != nx * ny:
        raise InvalidInputError(
            f"matrix has {arr.shape[0]} rows, expected nx*ny = {nx}*{ny} = {nx * ny}"
        )
    return arr.reshape(ny, nx, arr.shape[1]).transpose(1, 0, 2)


def frequency_axis(n_t, fs):
    """Two-sided Doppler frequency axis for an ``n_t``-point DFT.

    Returns ``(freqs, order)``: ``freqs`` ascends over ``(-fs/2, fs/2]`` and
    ``order`` maps display rows to DFT bins, so ``spectrum[..., order]`` is
    aligned with ``freqs``. For even ``n_t`` the Nyquist bin is labelled
    ``+fs/2``.
    """
    check_positive(n_t, "n_t", integer=True)
    check_positive(fs, "fs")
    f = np.fft.fftfreq(n_t, d=1.0 / fs)
    if n_t % 2 == 0:
        f[n_t // 2] = fs / 2
    order = np.argsort(f, kind="stable")
    return f[order], order
