"""Exact lattice coverings of space by convex polytopes, with a focus on simplices."""

__version__ = "1.0.0"
