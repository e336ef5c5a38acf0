"""Exact-arithmetic tools for rational varieties with a torus action of
complexity one, built around integral defining-matrix presentations.

Everything is computed over the integers or rationals; no floating
point is used anywhere in the package.
"""

__version__ = "0.1.0"
