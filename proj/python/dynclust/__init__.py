"""Fully dynamic metric clustering."""

import json

from ._core import DynclustError, KCenter, exact_kcenter, gauntlet, lsh_params, run_stream_text

__all__ = ["DynclustError", "KCenter", "exact_kcenter", "gauntlet", "lsh_params", "run_stream", "run_stream_text"]


def run_stream(text, **kwargs):
    """Run a stream given in the text format and return one dict per update."""
    return [json.loads(line) for line in run_stream_text(text, **kwargs).splitlines() if line]
