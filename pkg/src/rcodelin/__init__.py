"""Linearizability checks for second-order ODEs in a complex unknown of a
real variable, and for the systems of two real ODEs they split into."""

__version__ = "0.1.0"
