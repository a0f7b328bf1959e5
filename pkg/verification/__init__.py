"""Verification harness: CLI, exports, issue records and randomized sweeps."""
