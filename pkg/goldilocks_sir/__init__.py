"""Single-interval social distancing for the SIR epidemic model."""

__version__ = "0.3.0"
