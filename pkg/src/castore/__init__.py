"""Information content of symbol sequences via the CASToRe compressor."""

__version__ = "0.1.0"
