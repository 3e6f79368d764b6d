"""Benchmark driver: single runs, sweeps, the all-pairs oracle and result files."""
