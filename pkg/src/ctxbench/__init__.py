"""Noisy stabilizer-circuit simulation and contextuality experiments."""

__version__ = "0.1.0"
