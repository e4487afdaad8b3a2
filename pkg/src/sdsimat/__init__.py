"""Sparse OFDM channel estimation with sparsity-domain-smoothing IMAT,
benchmark estimators, and coherence-optimal pilot placement."""

__version__ = "0.1.0"

from .channel import ChannelConfig, SparseChannel, draw_channel, frequency_response
from .linalg import PartialDftMatrix, apply, build_partial_dft, pseudo_inverse
from .pilots import (
    CdsParams,
    PilotPattern,
    cds_family,
    coherence,
    coherence_lower_bound,
    difference_multiset,
    is_cds,
    load_base_cds,
    random_search,
)
from .recovery import (
    Imat,
    MeasurementSystem,
    OracleLeastSquares,
    OrthogonalMatchingPursuit,
    PilotInterpolation,
    RecoveryConfig,
    RecoveryResult,
    SdsImat,
    SmoothingWindow,
    imat,
    interpolate_estimate,
    omp,
    oracle_estimate,
    sds_imat,
)
