"""Jet-based verification of curvature identities along Ricci flow."""

__version__ = "0.1.0"
