"""Stack files, raster images, CSV series and run manifests.

Stack file layout (all little-endian)::

    offset  size  field
    0       4     magic b"LDH1"
    4       4     u32 nx
    8       4     u32 ny
    12      4     u32 nt_total
    16      4     f32 fs in Hz
    20      ...   nt_total frames of nx*ny complex samples, each stored as
                  (re, im) float32; within a frame y is the outer index

Rasters are binary PGM (P5, one byte per pixel) and PPM (P6, three bytes per
pixel) with maxval 255; image rows are ``y`` and columns ``x``.
"""
import csv
import struct

import numpy as np

from .core import HologramStack
from .exceptions import FormatError

__all__ = [
    "MAGIC",
    "read_stack",
    "write_stack",
    "write_pgm",
    "write_ppm",
    "read_pgm",
    "write_series_csv",
    "write_profile_csv",
    "write_manifest",
    "read_manifest",
]

MAGIC = b"LDH1"
_HEADER = struct.Struct("<4sIIIf")
_SAMPLE = np.dtype("<c8")


def write_stack(stack, path):
    """Write ``stack`` as complex64; complex128 data is rounded."""
    nx, ny, nt = stack.data.shape
    header = _HEADER.pack(MAGIC, nx, ny, nt, stack.fs)
    payload = np.ascontiguousarray(stack.data.transpose(2, 1, 0), dtype=_SAMPLE)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_stack(path):
    """Read a stack file, validating the header before touching the payload."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(
                f"header truncated: expected {_HEADER.size} bytes, got {len(head)}", len(head)
            )
        magic, nx, ny, nt, fs = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
        for name, value, off in (("nx", nx, 4), ("ny", ny, 8), ("nt_total", nt, 12)):
            if value == 0:
                raise FormatError(f"{name} must be positive", off)
        if not (np.isfinite(fs) and fs > 0):
            raise FormatError(f"sampling frequency must be positive, got {fs}", 16)
        expected = nx * ny * nt * _SAMPLE.itemsize
        payload = fh.read(expected + 1)
    if len(payload) != expected:
        kind = "truncated" if len(payload) < expected else "has trailing data"
        actual = len(payload) if len(payload) < expected else f"more than {expected}"
        raise FormatError(
            f"payload {kind}: expected {expected} bytes, got {actual}",
            _HEADER.size + min(len(payload), expected),
        )
    samples = np.frombuffer(payload, dtype=_SAMPLE)
    bad = ~np.isfinite(samples)
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise FormatError("non-finite sample", _HEADER.size + first * _SAMPLE.itemsize)
    data = samples.reshape(nt, ny, nx).transpose(2, 1, 0).astype(np.complex64)
    return HologramStack(data, float(fs))


def _raster_rows(image):
    img = np.asarray(image)
    if img.dtype != np.uint8:
        raise ValueError(f"raster must be uint8, got {img.dtype}")
    # (nx, ny[, 3]) -> rows of y
    return np.ascontiguousarray(np.swapaxes(img, 0, 1))


def write_pgm(image, path):
    """Write an ``(nx, ny)`` uint8 image as binary PGM."""
    rows = _raster_rows(image)
    h, w = rows.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rows.tobytes())


def write_ppm(rgb, path):
    """Write an ``(nx, ny, 3)`` uint8 image as binary PPM."""
    rows = _raster_rows(rgb)
    h, w, _ = rows.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rows.tobytes())


def read_pgm(path):
    """Read a binary PGM written by :func:`write_pgm`; returns ``(nx, ny)`` uint8."""
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        if end == pos:
            raise FormatError("PGM header truncated", pos)
        tokens.append(raw[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise FormatError(f"not a binary PGM: {tokens[0]!r}", 0)
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}", pos)
    body = raw[pos + 1:pos + 1 + w * h]
    if len(body) != w * h:
        raise FormatError(f"PGM payload truncated: expected {w * h}, got {len(body)}", pos + 1)
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).T.copy()


def write_series_csv(path, times, power, header=("time_s", "power")):
    """Time in seconds with 6 decimals, power with 6 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, p in zip(times, power):
            writer.writerow([f"{t:.6f}", f"{p:.6e}"])


def write_profile_csv(path, lambdas, db, fractions):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "singular_value", "db", "energy_fraction"])
        for i, (lam, d, f) in enumerate(zip(lambdas, db, fractions), start=1):
            writer.writerow([i, f"{lam:.6e}", f"{d:.6f}", f"{f:.6e}"])


def write_manifest(path, entries):
    """Plain ``key = value`` lines, in the order given."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def read_manifest(path):
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if " = " not in line:
                raise FormatError(f"bad manifest line {line!r}", lineno)
            key, value = line.split(" = ", 1)
            entries[key] = value
    return entries
