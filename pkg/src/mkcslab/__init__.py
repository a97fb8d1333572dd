"""Minimum-complexity recovery for underdetermined integer linear systems."""

__version__ = "0.1.0"
