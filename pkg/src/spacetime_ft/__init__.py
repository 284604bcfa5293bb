"""Fault-tolerance analysis of Clifford gadgets through their spacetime codes."""

__version__ = "0.1.0"
