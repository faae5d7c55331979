"""Poisson-time Skorokhod embedding of double exponential random walks.

Brownian motion observed at the arrivals of an independent Poisson process of
intensity ``2 lam`` is a random walk with double exponential increments.  The
package simulates that embedding, the transport processes coupled to it, and
audits the associated strong-approximation rate bounds.
"""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    DriftParams,
    asym_cdf,
    laplace_cdf,
    rates_from_drift,
    sample_asym,
    sample_laplace,
)
from .embedding import (  # noqa: E402
    ArrivalStream,
    FineGridPath,
    SkeletonPath,
    brownian_skeleton,
    direct_walk,
    joint_fine_grid,
    poisson_arrivals,
)
from .errors import CoverageError, DomainError, ZeroIncrementError  # noqa: E402
from .transport import (  # noqa: E402
    TransportPath,
    eval_transport,
    inflection_epochs,
    sup_distance,
    transport_direct,
    transport_drifted,
    transport_from_skeleton,
)
