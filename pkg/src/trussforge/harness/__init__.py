"""Scenario execution, metrics, traces, plots and the command line."""
