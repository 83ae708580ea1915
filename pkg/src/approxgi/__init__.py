"""Query-model simulation of approximate graph isomorphism testing."""
from .graph_core import Graph, Instance, Permutation, gen_no_instance, gen_yes_instance, make_rng

__version__ = "0.1.0"

__all__ = ["Graph", "Instance", "Permutation", "gen_no_instance", "gen_yes_instance", "make_rng", "__version__"]
