"""
Core lattice and Ising-model layer.

This package handles:
- Configuration management
- Logging setup
- Lattice geometry and dilution
- Couplings, spin states, energy and frustration
- Report models
"""
