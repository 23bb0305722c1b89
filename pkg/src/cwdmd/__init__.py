"""Wavelet-based dynamic mode decomposition via the continuous wavelet transform."""

__version__ = "0.1.0"

from . import dynsys, edmd, errors, observables, resolvent, wavelet  # noqa: E402,F401

__all__ = ["dynsys", "wavelet", "observables", "edmd", "resolvent", "errors", "__version__"]
