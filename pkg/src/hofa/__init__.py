"""Exact tools for bracket quadratics, two-step nilsequences and the additive combinatorics around them."""

__version__ = "0.1.0"
