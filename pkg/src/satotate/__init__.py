"""Desk-scale verification toolkit for generalized Sato-Tate measures."""

__version__ = "0.1.0"
