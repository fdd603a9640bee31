"""Driven non-Hermitian dimerised chains: Floquet spectra and PT thresholds."""

__version__ = "0.1.0"
