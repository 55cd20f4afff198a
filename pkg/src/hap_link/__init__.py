"""GEO satellite to high-altitude-platform link simulator."""

__version__ = "0.1.0"
