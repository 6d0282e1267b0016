"""Exact coefficient rings and truncated series."""
from .parse import parse_coeff
from .rings import GradedRing, RingElement, TateRing
from .series import (
    TateSeries,
    TruncSeries,
    promote,
    series_arith,
    series_invert,
    series_reversion,
    series_sqrt,
    series_substitute,
    tate_arith,
    to_tate,
)

__all__ = [
    "GradedRing",
    "RingElement",
    "TateRing",
    "TateSeries",
    "TruncSeries",
    "parse_coeff",
    "promote",
    "series_arith",
    "series_invert",
    "series_reversion",
    "series_sqrt",
    "series_substitute",
    "tate_arith",
    "to_tate",
]
