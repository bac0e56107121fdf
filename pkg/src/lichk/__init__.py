"""Bounded and inductive checking of latency-insensitive hardware designs."""

__version__ = "0.1.0"
