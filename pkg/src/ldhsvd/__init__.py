"""SVD clutter filtering and power Doppler processing for laser Doppler holography."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    HologramStack,
    Roi,
    WindowPlan,
    frequency_axis,
    plan_windows,
    reshape_from_casorati,
    reshape_to_casorati,
)
from .doppler import (  # noqa: E402
    DopplerSpectrum,
    FrequencyBand,
    PowerDopplerImage,
    Spectrogram,
    dpsd_window,
    power_doppler,
    roi_mean_series,
    spectrogram,
)
from .estimators import PowerDopplerTransformer, SVDClutterFilter  # noqa: E402
from .exceptions import FormatError, InvalidInputError, NumericalFailureError  # noqa: E402
from .pipeline import PipelineConfig, PowerDopplerMovie, compare_modes, process_stack  # noqa: E402
from .svd import (  # noqa: E402
    SvdBasis,
    clutter_filter,
    compute_svd_basis,
    eigenvector_mean_image,
    eigenvector_spectra,
    energy_fractions,
    rank_from_cutoff,
    singular_energy_profile,
)
