"""Keeps the tests directory importable so shared oracles resolve."""
