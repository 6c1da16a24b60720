"""Numerical toolkit for double Bruhat cells of SL(n, C) with the standard Poisson structure."""

__version__ = "0.1.0"
