"""arbor-rcm: branching processes and random-cluster measures on regular trees."""

__version__ = "0.1.0"
