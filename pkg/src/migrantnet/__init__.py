"""Migrant/native analysis of geo-tagged Twitter corpora and their follow graph."""

__version__ = "0.1.0"
