"""Robust multidimensional mean-payoff games compiled from two-sided counter machines."""

__version__ = "0.1.0"
