"""Monocular corridor depth from floor edge lines."""

from ._core import (
    Config,
    CorridorError,
    depth_metrics,
    estimate,
    extract_edges,
    render,
    synthetic_config,
    width_error,
)

__all__ = [
    "Config",
    "CorridorError",
    "depth_metrics",
    "estimate",
    "extract_edges",
    "render",
    "synthetic_config",
    "width_error",
]
