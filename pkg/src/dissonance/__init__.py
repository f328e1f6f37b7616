"""Speech-text dissonance detection toolkit."""

__version__ = "0.1.0"
