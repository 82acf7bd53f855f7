"""Rendering of spin1chain CLI outputs into publication-style figures."""

from .render import FigureSpec, SchemaError, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "render"]
