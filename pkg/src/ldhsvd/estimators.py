"""scikit-learn compatible wrappers.

Both transformers take a Casorati matrix ``X`` of shape ``(n_pixels, n_t)``:
pixels are samples and frames are features, so one window fits the usual
``(n_samples, n_features)`` convention. They compose with
``sklearn.pipeline.make_pipeline``::

    pipe = make_pipeline(SVDClutterFilter(cutoff=2000, fs=60e3),
                         PowerDopplerTransformer(fs=60e3, band=(2000, 6000)))
    m0 = pipe.fit_transform(H)   # one value per pixel
"""
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_casorati
from .doppler import FrequencyBand, dpsd_window, power_doppler
from .exceptions import InvalidInputError
from .svd import clutter_filter, compute_svd_basis, rank_from_cutoff

__all__ = ["SVDClutterFilter", "PowerDopplerTransformer"]


class SVDClutterFilter(TransformerMixin, BaseEstimator):
    """Remove the leading singular components of a space-time window.

    Parameters
    ----------
    n_clutter : int, optional
        Number of components to remove. Takes precedence over ``cutoff``.
    cutoff : float, optional
        Frequency-equivalent threshold in Hz; requires ``fs``.
    fs : float, optional
        Sampling frequency in Hz.

    Attributes
    ----------
    basis_ : SvdBasis
    n_clutter_ : int
    singular_values_ : ndarray of shape (n_t,)
    components_ : ndarray of shape (n_t, n_clutter_)
        The removed temporal vectors.
    """

    def __init__(self, n_clutter=None, cutoff=None, fs=None):
        self.n_clutter = n_clutter
        self.cutoff = cutoff
        self.fs = fs

    def _rank(self, n_t):
        if self.n_clutter is not None:
            if not 0 <= self.n_clutter <= n_t:
                raise InvalidInputError(f"n_clutter must lie in [0, {n_t}]")
            return int(self.n_clutter)
        if self.cutoff is None:
            return 0
        if self.fs is None:
            raise InvalidInputError("cutoff requires fs")
        return rank_from_cutoff(self.fs, n_t, self.cutoff)

    def fit(self, X, y=None):
        X = check_casorati(X)
        self.n_features_in_ = X.shape[1]
        self.basis_ = compute_svd_basis(X, spatial=False)
        self.n_clutter_ = self._rank(X.shape[1])
        self.singular_values_ = self.basis_.lambdas
        self.components_ = self.basis_.temporal_vectors[:, :self.n_clutter_]
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_casorati(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(
                f"X has {X.shape[1]} frames, filter was fitted on {self.n_features_in_}"
            )
        return clutter_filter(X, self.basis_, self.n_clutter_)


class PowerDopplerTransformer(TransformerMixin, BaseEstimator):
    """Per-pixel power Doppler of a space-time window.

    Stateless apart from recording the window length; ``transform`` returns
    one band-integrated power per row of ``X``.
    """

    def __init__(self, fs=1.0, band=(0.0, 0.5), two_sided=True, taper=None):
        self.fs = fs
        self.band = band
        self.two_sided = two_sided
        self.taper = taper

    def _band(self):
        band = self.band if isinstance(self.band, FrequencyBand) else FrequencyBand(*self.band)
        band.check_nyquist(self.fs)
        return band

    def fit(self, X, y=None):
        X = check_casorati(X)
        self._band()
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_casorati(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(
                f"X has {X.shape[1]} frames, transformer was fitted on {self.n_features_in_}"
            )
        spec = dpsd_window(X, self.fs, taper=self.taper)
        return power_doppler(spec, self._band(), two_sided=self.two_sided).m0
