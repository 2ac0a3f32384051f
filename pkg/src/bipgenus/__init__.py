"""Random bipartite graphs G(n1, n2, p): sampling, component structure,
planarity, genus certificates, limiting constants and seeded experiments."""

from .genus import GenusInterval, exact_genus_small, face_upper_bound, genus_interval
from .graph_core import (
    BipartiteGraph,
    ComponentSummary,
    GraphError,
    SimpleGraph,
    build_bipartite,
    build_simple,
    connected_components,
    read_graph,
    write_graph,
)
from .planarity import is_planar
from .projection import ProjectionReport, two_centre
from .sampler import SeedSpec, sample_binomial_graph, sample_bipartite
from .structure import (
    ClassifierThresholds,
    StructureReport,
    WorkLimitExceeded,
    classify_components,
    count_short_cycles,
    johansson_gap_check,
)
from .theory import (
    SeriesResult,
    expected_tree_components_exact,
    gamma_const,
    mu,
    nu,
    spanning_tree_count,
    zeta,
)

__version__ = "0.1.0"
