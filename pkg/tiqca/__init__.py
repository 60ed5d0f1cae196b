"""
Translation-Invariant QCA Simulator
===================================

Simulates a one-dimensional chain of identical five- or six-level sites
driven only by global pulses, and compiles logical circuits into pulse
programs for that chain.

  - Sparse amplitude-map states with a dense reference oracle
  - Controlled exchange pulses and global level swaps
  - Pointer macros: creation, steps, CNOTs and measurement preparation
  - Circuit compiler with tape routing and Euler-angle gate synthesis
  - Monte Carlo over random wall configurations with seeded trials
  - Verification suites for the oracle, protocols and scaling formulas
"""

__version__ = "1.0.0"
__author__ = "TIQCA Simulator"
