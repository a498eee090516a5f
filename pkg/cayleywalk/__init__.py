"""Self-avoiding walks, height functions and spectral bounds on Cayley graphs."""

__version__ = "0.3.0"
