"""Deterministic decoupled-viewpoint televisualization simulator."""

__version__ = "0.1.0"
