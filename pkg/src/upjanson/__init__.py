"""Janson-type lower-tail bounds for arbitrary monotone events on product spaces."""
from .bounds import (
    BoundReport,
    Summary,
    bound_i1,
    bound_i1a,
    bound_i2,
    bound_i2a,
    bound_i2e,
    build_report,
    lower_bound,
    phi,
    summarize,
)
from .dependency import (
    DependencyRelation,
    build_support_relation,
    refine_exact,
    validate_relation,
)
from .instance import generate, parse_instance, serialize_instance, subgraph_count
from .model import EventFamily, ProductSpace, UpSet, canonicalize, intersect, restrict, unite
from .oracle import (
    check_aim,
    check_aim2,
    check_axioms,
    enumerate_distribution,
    exact_lower_tail,
    verify,
)
from .prob import ProbValue, TooLargeForExact, exact_prob, mc_prob, pair_prob

__version__ = "0.1.0"
