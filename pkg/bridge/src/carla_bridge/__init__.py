"""Simulator capture bridge: synchronized sensor frames to interchange dumps."""

__version__ = "0.1.0"
