"""Tool-augmented SVA generation with a solver in the loop."""

__version__ = "0.1.0"
