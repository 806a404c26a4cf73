"""Economy SVD of a space-time window and the rank-truncation clutter filter.

The decomposition goes through the small ``n_t x n_t`` Gram matrix
``G = H^* H`` rather than a direct SVD of ``H``: with hundreds of thousands of
pixels and about a thousand frames, the Hermitian eigenproblem on ``G`` is far
cheaper and ``H`` is touched only by two matrix products.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_casorati, check_positive
from .core import frequency_axis
from .exceptions import InvalidInputError, NumericalFailureError

__all__ = [
    "SvdBasis",
    "compute_svd_basis",
    "clutter_filter",
    "rank_from_cutoff",
    "singular_energy_profile",
    "energy_fractions",
    "eigenvector_mean_image",
    "eigenvector_spectra",
]

#: Singular values below this fraction of the largest are treated as null.
RELATIVE_FLOOR = 1e-6


@dataclass(frozen=True)
class SvdBasis:
    """Singular triplets of one window, ordered by decreasing singular value.

    ``temporal_vectors[:, i]`` is V_i (length n_t) and ``spatial_vectors[:, i]``
    is U_i (length nx*ny). Columns of U beyond ``rank_eff`` are zero. When the
    basis was computed with ``spatial=False`` the spatial vectors are None.
    """

    lambdas: np.ndarray
    temporal_vectors: np.ndarray
    spatial_vectors: np.ndarray = None
    rank_eff: int = 0
    image_shape: tuple = None

    @property
    def n_t(self):
        return self.lambdas.shape[0]

    def reconstruct(self, start=0, stop=None):
        """Sum of ``lambda_i U_i V_i^*`` for ``start <= i < stop`` (0-based)."""
        if self.spatial_vectors is None:
            raise InvalidInputError("basis was computed without spatial vectors")
        sl = slice(start, stop)
        U = self.spatial_vectors[:, sl] * self.lambdas[sl]
        return U @ self.temporal_vectors[:, sl].conj().T


def compute_svd_basis(m, image_shape=None, spatial=True):
    """Economy SVD of a Casorati matrix via the eigendecomposition of ``H^* H``.

    Parameters
    ----------
    m : array_like, shape (n_pixels, n_t)
        Space-time matrix with ``n_pixels >= n_t``.
    image_shape : tuple of int, optional
        ``(nx, ny)``; stored on the basis for eigenvector images.
    spatial : bool
        Also compute the spatial vectors U_i. The clutter filter only needs V.

    Returns
    -------
    SvdBasis
    """
    H = check_casorati(m, name="Casorati matrix")
    n_pix, n_t = H.shape
    if n_pix < n_t:
        raise InvalidInputError(
            f"need at least as many pixels as frames, got {n_pix} x {n_t}"
        )
    if image_shape is not None:
        image_shape = tuple(int(s) for s in image_shape)
        if len(image_shape) != 2 or image_shape[0] * image_shape[1] != n_pix:
            raise InvalidInputError(f"image_shape {image_shape} does not match {n_pix} rows")

    G = H.conj().T @ H
    G = 0.5 * (G + G.conj().T)
    try:
        d, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"Gram eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(V))):
        raise NumericalFailureError("Gram eigendecomposition returned non-finite values")

    # eigh is ascending; a stable sort on -d keeps the eigen-index order on ties
    order = np.argsort(-d, kind="stable")
    lambdas = np.sqrt(np.clip(d[order], 0.0, None))
    V = V[:, order]

    lam1 = lambdas[0]
    rank_eff = int(np.count_nonzero(lambdas >= RELATIVE_FLOOR * lam1)) if lam1 > 0 else 0

    U = None
    if spatial:
        U = np.zeros((n_pix, n_t), dtype=np.complex128)
        if rank_eff:
            HV = H @ V[:, :rank_eff]
            # normalise by the column norm rather than lambda_i: near the floor
            # the Gram eigenvalue has lost relative precision, ||H V_i|| has not
            U[:, :rank_eff] = HV / np.linalg.norm(HV, axis=0)
    return SvdBasis(lambdas, V, U, rank_eff, image_shape)


def _check_rank(n_c, n_t):
    check_positive(n_c, "n_c", integer=True, allow_zero=True)
    if n_c > n_t:
        raise InvalidInputError(f"n_c = {n_c} exceeds the number of frames {n_t}")
    return int(n_c)


def clutter_filter(m, basis, n_c):
    """Remove the ``n_c`` leading singular components from ``m``.

    Computed as the projection ``H - (H V_c) V_c^*`` onto the complement of
    the leading temporal vectors, which equals ``sum_{i > n_c} lambda_i U_i V_i^*``.
    """
    H = check_casorati(m, name="Casorati matrix")
    if basis.n_t != H.shape[1]:
        raise InvalidInputError(f"basis has {basis.n_t} frames, matrix has {H.shape[1]}")
    n_c = _check_rank(n_c, basis.n_t)
    if n_c == 0:
        return H.copy()
    if n_c == basis.n_t:
        return np.zeros_like(H)
    Vc = basis.temporal_vectors[:, :n_c]
    return H - (H @ Vc) @ Vc.conj().T


def rank_from_cutoff(fs, n_t, f1):
    """Clutter rank equivalent to a temporal cutoff ``f1``: ``round(2 n_t f1 / fs)``.

    Half-way values round to even (Python's ``round``); the result is clamped
    to ``[0, n_t]``.

    >>> rank_from_cutoff(75e3, 1024, 2e3)
    55
    """
    check_positive(fs, "fs")
    check_positive(n_t, "n_t", integer=True)
    check_positive(f1, "f1", allow_zero=True)
    if f1 > fs / 2:
        raise InvalidInputError(f"cutoff {f1} Hz is above Nyquist ({fs / 2} Hz)")
    n_c = round(2 * n_t * f1 / fs)
    return int(min(max(n_c, 0), n_t))


def _lambdas(basis):
    return basis.lambdas if isinstance(basis, SvdBasis) else np.asarray(basis, dtype=float)


def singular_energy_profile(basis):
    """Singular values in dB relative to the first: ``20 log10(lambda_i / lambda_1)``."""
    lam = _lambdas(basis)
    if lam.size == 0 or not lam[0] > 0:
        raise InvalidInputError("singular value profile needs lambda_1 > 0")
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(lam / lam[0])


def energy_fractions(basis):
    """Share of the total energy ``lambda_i^2 / sum lambda^2`` per component."""
    lam = _lambdas(basis)
    total = np.sum(lam ** 2)
    if not total > 0:
        raise InvalidInputError("basis carries no energy")
    return lam ** 2 / total


def eigenvector_mean_image(basis, m, n, image_shape=None):
    """Pixel-wise mean of ``|U_i|`` for ``m <= i <= n`` (1-based, inclusive).

    Returns an ``(nx, ny)`` image.
    """
    if basis.spatial_vectors is None:
        raise InvalidInputError("basis was computed without spatial vectors")
    shape = image_shape if image_shape is not None else basis.image_shape
    if shape is None:
        raise InvalidInputError("image_shape is required")
    nx, ny = shape
    if nx * ny != basis.spatial_vectors.shape[0]:
        raise InvalidInputError(f"image_shape {shape} does not match the basis")
    if not (1 <= m <= n <= basis.n_t):
        raise InvalidInputError(f"eigenvector range {m}..{n} outside 1..{basis.n_t}")
    mean = np.abs(basis.spatial_vectors[:, m - 1:n]).mean(axis=1)
    return mean.reshape(ny, nx).T


def eigenvector_spectra(basis, fs=1.0, floor_db=-300.0):
    """Power spectra of the singular-value-weighted temporal vectors, in dB.

    Column ``i`` is ``|DFT(lambda_i V_i)|^2`` with rows ordered from -fs/2 to
    +fs/2. The map is normalised by its global maximum, so the peak is 0 dB;
    zeros are clipped to ``floor_db``.

    Returns
    -------
    db : ndarray, shape (n_t, n_t)
    freqs : ndarray, shape (n_t,)
    """
    freqs, order = frequency_axis(basis.n_t, fs)
    weighted = basis.temporal_vectors * basis.lambdas
    power = np.abs(np.fft.fft(weighted, axis=0)) ** 2
    power = power[order]
    peak = power.max()
    if not peak > 0:
        raise InvalidInputError("basis carries no energy")
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power / peak)
    return np.maximum(db, floor_db), freqs
