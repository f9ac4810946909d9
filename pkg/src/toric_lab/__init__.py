"""Toric-code decoding lab: deep Q-learning agents and an exact MWPM baseline."""

__version__ = "0.1.0"
