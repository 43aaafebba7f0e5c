"""Observability analysis of DC power networks by variance-only belief propagation.

Inputs may be file paths, JSON strings, or already-decoded lists/dicts.
Results come back as decoded JSON reports.
"""

import json
import os

from . import _gbpobs
from ._gbpobs import AmbiguousConvergence

__all__ = ["AmbiguousConvergence", "islands", "oracle", "restore", "bench"]


def _text(src):
    if isinstance(src, (dict, list)):
        return json.dumps(src)
    if isinstance(src, os.PathLike) or (isinstance(src, str) and os.path.isfile(src)):
        with open(src, encoding="utf-8") as f:
            return f.read()
    return src


def islands(case, measurements, probe="lowest", seed=0, tau_max=1000):
    return json.loads(_gbpobs.islands(_text(case), _text(measurements), probe, seed, tau_max))


def oracle(case, measurements):
    return json.loads(_gbpobs.oracle(_text(case), _text(measurements)))


def restore(case, measurements, pseudo=None, v_i=1.0, tau_max=1000):
    p = None if pseudo is None else _text(pseudo)
    return json.loads(_gbpobs.restore(_text(case), _text(measurements), p, v_i, tau_max))


def bench(buses, configs, redundancy=(1.0, 2.0), seed=1, methods=("gbp", "oracle"), avg_degree=2.7):
    """Returns (csv_text, summary_dict)."""
    csv, summary = _gbpobs.bench(buses, configs, redundancy[0], redundancy[1], seed, list(methods), avg_degree)
    return csv, json.loads(summary)
