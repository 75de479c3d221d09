"""Quantitative equational reasoning for linear and affine lambda calculi."""

__version__ = "0.1.0"
