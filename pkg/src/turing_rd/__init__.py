"""Ratio-dependent predator-prey reaction-diffusion: Turing analysis and simulation."""
