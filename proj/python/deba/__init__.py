# SPDX-License-Identifier: Apache-2.0
"""Adaptive batch-size scheduler engine."""

from ._deba import (
    Config,
    Engine,
    Error,
    __version__,
    calibrate,
    classify_taxonomy,
    gradient_norm,
    gradient_variance,
    preset_names,
    profile,
    replay,
)

__all__ = [
    "Config",
    "Engine",
    "Error",
    "__version__",
    "calibrate",
    "classify_taxonomy",
    "gradient_norm",
    "gradient_variance",
    "preset_names",
    "profile",
    "replay",
]
