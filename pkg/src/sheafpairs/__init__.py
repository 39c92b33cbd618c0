"""Exact computations for moduli of rank-2 sheaf stable pairs on surfaces."""

__version__ = "0.1.0"
