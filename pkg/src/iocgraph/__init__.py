"""iocgraph: bipartite document/indicator graph engine for OSINT text."""

__version__ = "0.1.0"
