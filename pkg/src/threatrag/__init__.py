"""threatrag: retrieval-augmented cyber-threat knowledge engine."""

__version__ = "0.1.0"
