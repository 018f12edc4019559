"""Exact line-covering journey search on transit networks.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from ._metrocover import (  # noqa: F401
    InfeasibleError,
    Network,
    SolverBackendError,
    canonical_text,
    enumerate_solutions,
    export_geojson,
    export_table,
    load_network,
    parse_network,
    prune,
    solve,
    validate,
)

__all__ = [
    "InfeasibleError",
    "Network",
    "SolverBackendError",
    "canonical_text",
    "enumerate_solutions",
    "export_geojson",
    "export_table",
    "load_network",
    "parse_network",
    "prune",
    "solve",
    "validate",
]
