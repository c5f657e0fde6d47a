"""4D loop-only toric codes on integer lattices: construction, circuits, simulation, decoding."""
from .lattice import HnfMatrix, Torus, hnf_reduce, named_lattice
from .complex import CssCode, css_from_lattice

__all__ = ["HnfMatrix", "Torus", "hnf_reduce", "named_lattice", "CssCode", "css_from_lattice"]
__version__ = "0.1.0"
