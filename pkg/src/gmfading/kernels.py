"""Kernel backend selection.

The compiled extension is used when it imports; setting ``GMFADING_PURE=1``
forces the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GMFADING_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

gauss_markov = _impl.gauss_markov
logdet_batch = _impl.logdet_batch
output_terms = _impl.output_terms
residual_energy = _impl.residual_energy
codebook_residuals = _impl.codebook_residuals

__all__ = [
    "BACKEND",
    "gauss_markov",
    "logdet_batch",
    "output_terms",
    "residual_energy",
    "codebook_residuals",
]
