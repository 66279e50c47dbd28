"""Online weighted conformal prediction for panel data."""

__version__ = "0.1.0"
