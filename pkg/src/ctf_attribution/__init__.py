"""Attacker attribution on capture-the-flag attack traffic."""

__version__ = "0.1.0"
