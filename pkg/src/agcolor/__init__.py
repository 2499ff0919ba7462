"""Locally-iterative distributed coloring: simulator, algorithms and checkers."""

__version__ = "0.1.0"
