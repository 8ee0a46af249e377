"""Exact computation and verification toolkit for BMS numbers."""

from __future__ import annotations

__version__ = "0.1.0"
