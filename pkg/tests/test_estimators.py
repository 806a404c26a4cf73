import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from conftest import random_complex
from ldhsvd import (
    FrequencyBand,
    InvalidInputError,
    PowerDopplerTransformer,
    SVDClutterFilter,
    clutter_filter,
    compute_svd_basis,
    dpsd_window,
    power_doppler,
)


@pytest.fixture
def H(rng):
    return random_complex(rng, (80, 32))


def test_params_and_clone():
    f = SVDClutterFilter(cutoff=2000, fs=60e3)
    assert f.get_params() == {"n_clutter": None, "cutoff": 2000, "fs": 60e3}
    g = clone(f).set_params(n_clutter=3)
    assert g.n_clutter == 3 and f.n_clutter is None
    p = PowerDopplerTransformer(fs=60e3, band=(2000, 6000))
    assert clone(p).get_params()["band"] == (2000, 6000)


def test_filter_matches_functional_api(H):
    f = SVDClutterFilter(n_clutter=4).fit(H)
    expected = clutter_filter(H, compute_svd_basis(H), 4)
    np.testing.assert_allclose(f.transform(H), expected, rtol=1e-12)
    assert f.components_.shape == (32, 4)
    assert f.singular_values_.shape == (32,)
    assert f.n_features_in_ == 32


def test_filter_rank_rules(H):
    assert SVDClutterFilter(cutoff=2000, fs=60e3).fit(H).n_clutter_ == 2
    assert SVDClutterFilter().fit(H).n_clutter_ == 0
    with pytest.raises(InvalidInputError):
        SVDClutterFilter(cutoff=2000).fit(H)
    with pytest.raises(InvalidInputError):
        SVDClutterFilter(n_clutter=33).fit(H)


def test_filter_errors(H):
    with pytest.raises(NotFittedError):
        SVDClutterFilter(n_clutter=1).transform(H)
    f = SVDClutterFilter(n_clutter=1).fit(H)
    with pytest.raises(InvalidInputError):
        f.transform(H[:, :10])


def test_power_doppler_transformer(H):
    t = PowerDopplerTransformer(fs=8000.0, band=(500, 2000))
    out = t.fit_transform(H)
    expected = power_doppler(dpsd_window(H, 8000.0), FrequencyBand(500, 2000)).m0
    np.testing.assert_allclose(out, expected)
    with pytest.raises(InvalidInputError):
        PowerDopplerTransformer(fs=8000.0, band=(500, 5000)).fit(H)


def test_pipeline_composition(H):
    pipe = make_pipeline(
        SVDClutterFilter(cutoff=500, fs=8000.0),
        PowerDopplerTransformer(fs=8000.0, band=FrequencyBand(500, 2000)),
    )
    out = pipe.fit_transform(H)
    Hf = clutter_filter(H, compute_svd_basis(H), 4)
    np.testing.assert_allclose(out, power_doppler(dpsd_window(Hf, 8000.0), FrequencyBand(500, 2000)).m0)
    assert out.shape == (80,)
