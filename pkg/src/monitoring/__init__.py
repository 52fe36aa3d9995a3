"""Métricas Prometheus do dephasim."""
