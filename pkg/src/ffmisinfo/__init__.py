"""Fractal-fractional model of harmful vaccine information spread."""
