"""Polymorphism search, the structure K and symmetric/cyclic term machinery."""

__version__ = "0.1.0"
