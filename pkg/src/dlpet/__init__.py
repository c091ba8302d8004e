"""Exact tools for the octagonal double lattice PET family."""
__version__ = "0.1.0"
