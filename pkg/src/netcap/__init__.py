"""Capacity analysis for deep nets with fixed weight structure."""

__version__ = "0.1.0"
