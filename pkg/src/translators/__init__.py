"""Rotationally symmetric translating solitons of mean curvature flow."""

__version__ = "0.1.0"
