"""Exact zero divisors in short local algebras: computation toolkit."""

__version__ = "0.1.0"
