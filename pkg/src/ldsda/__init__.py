"""Logic-based discrete steepest descent for generalized disjunctive programs."""
__version__ = "0.1.0"
