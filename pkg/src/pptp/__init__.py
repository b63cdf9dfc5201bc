"""Privacy-preserving transparent pricing for energy retail."""

__version__ = "0.1.0"
