"""Executable experiments on topological generators of Polish groups."""

__version__ = "0.1.0"
