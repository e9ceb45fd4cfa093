"""Numerical lab for Gabor wave front sets, quadratic flows and paradifferential splittings."""

__version__ = "0.1.0"
