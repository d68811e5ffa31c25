"""Exact Birkhoff sums, Birkhoff measures, and discrepancies of circle rotations."""

__version__ = "1.0.0"

SCHEMA_VERSION = 1
