"""Component structure of the random bipartite graph G(n, n, p) near p = 1/n.

Exact enumeration of connected bipartite graphs by class sizes and excess, the
scalar predictions of the near-critical theory, a sparse sampler with
sprinkling, a component census, and Monte Carlo experiments tying them
together.
"""

from .numeric import (DomainError, delta, epsilon_prime, giant_excess_prediction,
                      giant_order_prediction, poisson_lambda, poisson_nu,
                      sprinkle_probability, tree_order_threshold)
from .enumeration import (BipartiteShape, LogReal, count_connected_oracle, count_forests,
                          count_trees, count_unicyclic, expected_components)
from .sampler import GraphSample, sample, sprinkle
from .census import ComponentCensus

__version__ = "0.1.0"
