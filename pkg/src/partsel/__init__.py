"""Partitioning-strategy selection for distributed vertex-cut graph processing."""

__version__ = "0.1.0"
