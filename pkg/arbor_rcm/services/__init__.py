"""Computational services: generating functions, solvers, simulation, enumeration."""
