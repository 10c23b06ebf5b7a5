"""Parsers for the command-line value syntax."""

from poisson_bv.parsers.values import ValueParser

__all__ = ["ValueParser"]
