"""Generalized information measures and the rate-fidelity function."""
