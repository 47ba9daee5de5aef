"""Problems module - Ising problem instances and N_c-filtered instance sets."""
from .instances import ProblemInstance, load_instance, named_instance, random_instance

__all__ = ["ProblemInstance", "load_instance", "named_instance", "random_instance"]
