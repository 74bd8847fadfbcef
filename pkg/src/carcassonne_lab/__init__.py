"""Carcassonne testbed for UCT, RAVE, Star-minimax and evolved selection policies."""

__version__ = "0.1.0"
