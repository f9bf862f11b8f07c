"""Perturbation theory toolkit for non-normal matrix spectra."""
__version__ = "0.1.0"
