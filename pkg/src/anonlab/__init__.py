"""Anonymous prediction of step functions and smooth glue maps."""

__version__ = "0.1.0"
