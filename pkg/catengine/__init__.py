"""Conditional linear-optical synthesis of Schrödinger cat states in truncated Fock space."""

__version__ = "0.1.0"
