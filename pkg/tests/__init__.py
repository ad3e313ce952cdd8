"""Test suite for refsynth; oracles.py holds the independent reference implementations."""
