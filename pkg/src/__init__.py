"""Ensemble AQC - simulation toolkit for ensemble-encoded adiabatic quantum computing."""
