"""Analytic inductive sequents, structural rule synthesis and derivations."""

__version__ = "0.1.0"
