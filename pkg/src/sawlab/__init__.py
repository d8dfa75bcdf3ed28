"""sawlab: numerical laboratory for self-avoiding walks, SLE, and Brownian frontiers."""

__version__ = "0.1.0"

from .estimates import EstimateWithError  # noqa: F401
