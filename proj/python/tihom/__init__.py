"""Spectral periodic homogenization on integer pattern lattices."""

import json
import os

from ._tihom import Error, __version__, fft, green_coeff, ifft, iso_stiffness, read_field
from . import _tihom

__all__ = [
    "Error",
    "__version__",
    "fft",
    "ifft",
    "green_coeff",
    "iso_stiffness",
    "pattern_info",
    "read_field",
    "solve",
    "sweep_alpha",
]


def _config(config, base_dir):
    if isinstance(config, (str, os.PathLike)):
        path = os.fspath(config)
        with open(path) as fh:
            text = fh.read()
        return text, base_dir if base_dir is not None else os.path.dirname(os.path.abspath(path))
    return json.dumps(config), base_dir or ""


def pattern_info(matrix):
    """Smith form, extents and FFT plan of a pattern matrix given as text."""
    return json.loads(_tihom.pattern_info(matrix))


def solve(config, base_dir=None, write=False):
    """Run one solve from a config dict or JSON path.

    Returns (report, total_strain) with the strain as an m x D complex array.
    Artifacts are written only when write is true.
    """
    text, base = _config(config, base_dir)
    report, strain = _tihom.solve(text, base, write)
    return json.loads(report), strain


def sweep_alpha(config, base_dir=None, write=False):
    text, base = _config(config, base_dir)
    return json.loads(_tihom.sweep_alpha(text, base, write))
