"""Verification-grade exterior calculus for flat G2 and Spin(7) geometry."""

__version__ = "0.1.0"
