"""Utilidades auxiliares para o dephasim."""
