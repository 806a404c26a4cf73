"""Input validation helpers shared by the functional API and the estimators.

These play the role of ``sklearn.utils.check_array`` for complex data, which
scikit-learn refuses.
"""
import numbers

import numpy as np

from .exceptions import InvalidInputError


def check_complex_array(X, *, ndim=None, name="X", min_shape=None):
    """Return ``X`` as a finite complex128 ndarray.

    Real inputs are promoted. Raises InvalidInputError on wrong rank,
    empty axes or non-finite entries.
    """
    try:
        arr = np.asarray(X)
    except Exception as exc:  # ragged lists and the like
        raise InvalidInputError(f"{name} is not array-like: {exc}") from exc
    if arr.dtype == object or not (
        np.issubdtype(arr.dtype, np.number) or arr.dtype == bool
    ):
        raise InvalidInputError(f"{name} must be numeric, got dtype {arr.dtype}")
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0 or 0 in arr.shape:
        raise InvalidInputError(f"{name} is empty (shape {arr.shape})")
    if min_shape is not None:
        for axis, (have, need) in enumerate(zip(arr.shape, min_shape)):
            if have < need:
                raise InvalidInputError(
                    f"{name} needs at least {need} entries along axis {axis}, got {have}"
                )
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_casorati(X, name="X"):
    """Validate a space-time (pixels x frames) matrix."""
    return check_complex_array(X, ndim=2, name=name)


def check_positive(value, name, *, integer=False, allow_zero=False):
    if integer:
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    elif not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise InvalidInputError(f"{name} must be a finite number, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidInputError(f"{name} must be {bound}, got {value!r}")
    return value


def check_mask(mask, shape, name="mask"):
    """Boolean mask of the given image shape with at least one pixel set."""
    m = np.asarray(mask)
    if m.shape != tuple(shape):
        raise InvalidInputError(f"{name} has shape {m.shape}, expected {tuple(shape)}")
    m = m.astype(bool)
    if not m.any():
        raise InvalidInputError(f"{name} selects no pixel")
    return m
