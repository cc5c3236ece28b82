"""Hybrid TDGL / BCS-gap simulator with a stabilized linear IMEX scheme."""

__version__ = "0.1.0"
