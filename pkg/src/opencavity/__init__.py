"""Field modes, resonances and atom coupling of open Bragg-mirror cavities."""

__version__ = "0.1.0"
