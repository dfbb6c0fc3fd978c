"""Exact charts of transportation and Birkhoff polytopes."""

import json

from ._core import (
    BirkhoffError,
    analyze,
    bvn,
    chart_dimension,
    count_params,
    ds_deviation,
    kronecker,
    rtbp_forward,
    sinkhorn,
    tbp_forward,
    tbp_inverse,
)
from . import _core

__all__ = [
    "BirkhoffError",
    "analyze",
    "bvn",
    "chart_dimension",
    "count_params",
    "ds_deviation",
    "kronecker",
    "mixer",
    "mixer_param_count",
    "rtbp_forward",
    "sinkhorn",
    "tbp_forward",
    "tbp_inverse",
]


def mixer(spec, logits=None):
    """Build a mixer from a spec dict, e.g. {"kind": "rtbp", "n": 6}.

    Returns (matrix, residual); residual is None for the exact kinds.
    """
    return _core._build_mixer(json.dumps(spec), logits)


def mixer_param_count(spec):
    return _core._param_count(json.dumps(spec))
