"""Pacote principal do dephasim."""

__version__ = "0.1.0"
