"""Classical image-processing toolkit for circuit-board defect inspection."""

__version__ = "0.1.0"
