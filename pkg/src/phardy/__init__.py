"""Discrete quasilinear Schrödinger operators and Hardy weights on graphs."""

__version__ = "0.1.0"
