"""Secrecy rate regions for the compound multiple-access channel with a confidential message."""

__version__ = "0.1.0"
