"""Competitiveness of last-round group-stage games under different tournament formats."""

__version__ = "0.1.0"
