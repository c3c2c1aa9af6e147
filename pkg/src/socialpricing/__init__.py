"""Equilibrium analysis and simulation of personalized pricing under social-data manipulation."""

__version__ = "0.1.0"
