"""LiDAR-guided stereo matching toolkit.

Dense matchers (semi-global and AD-Census style) whose cost volumes can be
modulated by sparse trusted disparities, plus the sampling, scoring and
file-format helpers around them. Disparity arrays use +inf for pixels
without data; ``valid_mask`` gives the finite-pixel mask.
"""

import numpy as _np

from ._core import (
    INVALID,
    __version__,
    auto_window_size,
    evaluate,
    gauss_multiplier,
    lidar_density,
    load_gray,
    match,
    read_disparity_png16,
    read_pfm,
    read_sparse_csv,
    render_falsecolor,
    riverbed_multiplier,
    sample,
    write_pfm,
    write_sparse_csv,
)


def valid_mask(disparity):
    """Boolean mask of pixels carrying a real disparity."""
    return _np.isfinite(disparity)


__all__ = [
    "INVALID",
    "__version__",
    "auto_window_size",
    "evaluate",
    "gauss_multiplier",
    "lidar_density",
    "load_gray",
    "match",
    "read_disparity_png16",
    "read_pfm",
    "read_sparse_csv",
    "render_falsecolor",
    "riverbed_multiplier",
    "sample",
    "valid_mask",
    "write_pfm",
    "write_sparse_csv",
]
