"""Compile small neural networks with public weights to R1CS and prove inference."""

__version__ = "0.1.0"
