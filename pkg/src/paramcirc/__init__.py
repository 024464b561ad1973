"""Parameterized arithmetic-circuit constructions checked against brute-force oracles."""

__version__ = "0.1.0"
