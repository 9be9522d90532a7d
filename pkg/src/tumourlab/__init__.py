"""Numerical lab for the 1D two-species Hele-Shaw tumour growth system."""

__version__ = "0.1.0"
