"""Adaptive task sampling for episodic few-shot training."""

__version__ = "0.1.0"
