"""Linked-cell molecular dynamics on an instrumented partitioned shared space."""
