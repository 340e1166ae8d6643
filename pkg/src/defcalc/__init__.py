"""Exact finite-dimensional models of deformation calculus: enveloping algebras, Artin towers,
Cartan formulas, Jacobi complexes and the trace 2-form."""

__version__ = "0.1.0"
