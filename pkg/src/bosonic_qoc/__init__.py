"""Pulse-level synthesis of qudit QAOA layers on a transmon coupled to bosonic cavity modes."""

__version__ = "0.1.0"
