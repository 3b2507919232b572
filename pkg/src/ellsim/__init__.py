"""Simulator and exhaustive checker for two-rule self-stabilizing graph algorithms."""

__version__ = "0.1.0"
