"""Exact length spectra, Morse indices and wave-trace checks for compact symmetric spaces."""

__version__ = "0.1.0"
