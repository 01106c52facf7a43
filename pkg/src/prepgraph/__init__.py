"""Minimum distance graphs of extended Preparata codes and their blind reconstruction."""

__version__ = "0.1.0"
