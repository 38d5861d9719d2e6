"""Constraint-aware travel-plan evaluation and iterative prompt optimization."""

__version__ = "0.1.0"
