"""Grading and structure-feedback pipeline for abstracting assignments."""

__version__ = "0.1.0"
