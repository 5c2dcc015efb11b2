"""Exact Hochschild/cyclic homology engine for weight-graded quotient presentations."""

__version__ = "0.1.0"

ENGINE_VERSION = __version__
