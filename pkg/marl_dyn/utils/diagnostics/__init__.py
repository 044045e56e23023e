"""Estimators for the stability of recorded parameter trajectories."""
