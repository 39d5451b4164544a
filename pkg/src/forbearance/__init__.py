"""Mutual-forbearance duopoly laboratory: repeated Bertrand play, growth
dynamics, synthetic firm panels and linear estimators."""

__version__ = "0.1.0"
