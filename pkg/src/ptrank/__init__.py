"""Partial-transpose rank workbench."""

__version__ = "0.1.0"
