"""Warning Propagation on planted random 3-SAT."""

__version__ = "0.1.0"
