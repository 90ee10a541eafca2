"""Numerical experiments on almost periodic functions and their compositions."""

from __future__ import annotations

__version__ = "0.1.0"
