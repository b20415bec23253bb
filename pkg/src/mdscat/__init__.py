"""Multi-resolution dual-tree complex wavelet scattering features with SVM classification."""

from .dtcwt import (ORIENTATIONS, DtcwtPyramid, FilterBank, default_filter_bank, forward_1d,
                    forward_2d, inverse_1d, inverse_2d, lowpass_smooth)
from .errors import ConfigError, DataError, InvariantError, StructureError
from .pyramid import ResolutionSet, multi_resolution
from .scattering import (PathDescriptor, ScatterConfig, ScatterFeatures, log_transform,
                         multi_resolution_scatter, region_l2, scatter_transform)

__all__ = [
    "ORIENTATIONS", "DtcwtPyramid", "FilterBank", "default_filter_bank", "forward_1d", "forward_2d",
    "inverse_1d", "inverse_2d", "lowpass_smooth", "ConfigError", "DataError", "InvariantError",
    "StructureError", "ResolutionSet", "multi_resolution", "PathDescriptor", "ScatterConfig",
    "ScatterFeatures", "log_transform", "multi_resolution_scatter", "region_l2", "scatter_transform",
]
