"""Exact calculus for formal group laws, characteristic classes and C^n-structures."""

__version__ = "0.1.0"
