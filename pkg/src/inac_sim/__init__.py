"""Seedable simulator for integrated navigation and communication satellite links."""

__version__ = "0.1.0"
