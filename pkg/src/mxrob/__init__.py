"""Robustness of two-layer multiplex networks under layer-node and
multiplex-node attacks: simulation and generating-function theory."""

__version__ = "0.1.0"
