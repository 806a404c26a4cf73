"""Display normalisation and colour composites of power Doppler images."""
from dataclasses import dataclass, field

import numpy as np

from .doppler import PowerDopplerImage
from .exceptions import InvalidInputError

__all__ = [
    "CompositeImage",
    "to_display_gray",
    "composite_two_band",
    "composite_two_phase",
    "ORANGE",
    "BLUE",
]

ORANGE = (1.0, 0.5, 0.0)
BLUE = (0.0, 0.3, 1.0)
SCALES = ("linear", "log")


def _values(image):
    m0 = image.m0 if isinstance(image, PowerDopplerImage) else image
    v = np.asarray(m0, dtype=float)
    if v.ndim != 2:
        raise InvalidInputError(f"image must be 2-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("image contains non-finite values")
    return v


def _prepare(v, scale):
    """Transformed values and the mask of pixels carrying signal."""
    if scale not in SCALES:
        raise InvalidInputError(f"scale must be one of {SCALES}, got {scale!r}")
    if scale == "log":
        live = v > 0
        out = np.zeros_like(v)
        out[live] = np.log10(v[live])
        return out, live
    return v, v != 0


def _check_pct(lo_pct, hi_pct):
    if not 0 <= lo_pct < hi_pct <= 100:
        raise InvalidInputError(f"need 0 <= lo_pct < hi_pct <= 100, got {lo_pct}, {hi_pct}")


def _normalise(values, live, lo, hi):
    """Unit-interval levels; ``None`` signals the constant-image case."""
    if hi <= lo:
        return None
    unit = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    unit[~live] = 0.0
    return unit


def to_display_gray(image, lo_pct=1.0, hi_pct=99.0, scale="log"):
    """8-bit rendering clipped at percentiles of the non-zero pixels.

    In log mode ``log10`` is applied before the percentiles are taken. A
    constant image renders as uniform 128; an all-zero image renders black.
    """
    _check_pct(lo_pct, hi_pct)
    values, live = _prepare(_values(image), scale)
    if not live.any():
        return np.zeros(values.shape, dtype=np.uint8)
    lo, hi = np.percentile(values[live], [lo_pct, hi_pct])
    unit = _normalise(values, live, lo, hi)
    if unit is None:
        return np.full(values.shape, 128, dtype=np.uint8)
    return np.rint(unit * 255).astype(np.uint8)


@dataclass(frozen=True)
class CompositeImage:
    """RGB levels in ``[0, 1]`` with shape ``(nx, ny, 3)``."""

    rgb: np.ndarray
    provenance: dict = field(default_factory=dict)

    def to_uint8(self):
        return np.rint(np.clip(self.rgb, 0, 1) * 255).astype(np.uint8)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise InvalidInputError(f"image shapes differ: {a.shape} vs {b.shape}")


def composite_two_band(low, high, lo_pct=1.0, hi_pct=99.0, scale="log"):
    """Low band in cyan (green + blue), high band in red.

    Each band is normalised on its own with :func:`to_display_gray`.
    """
    lv, hv = _values(low), _values(high)
    _same_shape(lv, hv)
    g_low = to_display_gray(lv, lo_pct, hi_pct, scale) / 255.0
    g_high = to_display_gray(hv, lo_pct, hi_pct, scale) / 255.0
    rgb = np.stack([g_high, g_low, g_low], axis=-1)
    prov = {"red": "high", "green": "low", "blue": "low"}
    for name, img in (("low", low), ("high", high)):
        if isinstance(img, PowerDopplerImage):
            prov[f"{name}_band"] = str(img.band)
    return CompositeImage(rgb, prov)


def composite_two_phase(systole, diastole, systole_color=ORANGE, diastole_color=BLUE,
                        lo_pct=1.0, hi_pct=100.0, scale="linear"):
    """Systole mean in orange plus diastole mean in blue, clipped to ``[0, 1]``.

    Both images share one normalisation (percentiles over the union of their
    non-zero pixels) so that a vessel brighter in systole leans orange.
    """
    _check_pct(lo_pct, hi_pct)
    sv, dv = _values(systole), _values(diastole)
    _same_shape(sv, dv)
    s_vals, s_live = _prepare(sv, scale)
    d_vals, d_live = _prepare(dv, scale)
    pooled = np.concatenate([s_vals[s_live], d_vals[d_live]])
    if pooled.size == 0:
        s_unit = d_unit = np.zeros(sv.shape)
    else:
        lo, hi = np.percentile(pooled, [lo_pct, hi_pct])
        s_unit = _normalise(s_vals, s_live, lo, hi)
        d_unit = _normalise(d_vals, d_live, lo, hi)
        if s_unit is None:
            s_unit = np.where(s_live, 0.5, 0.0)
            d_unit = np.where(d_live, 0.5, 0.0)
    rgb = (s_unit[..., None] * np.asarray(systole_color, dtype=float)
           + d_unit[..., None] * np.asarray(diastole_color, dtype=float))
    prov = {"systole_color": tuple(systole_color), "diastole_color": tuple(diastole_color)}
    return CompositeImage(np.clip(rgb, 0.0, 1.0), prov)
