"""Experiment harness: batch runs, comparison metrics, tuning."""
