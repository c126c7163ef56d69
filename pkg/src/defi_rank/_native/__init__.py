"""Compiled kernel core (Cython). Built by setup.py; optional at runtime."""
