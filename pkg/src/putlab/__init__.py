"""Privacy-utility trade-offs estimated from samples.

Core types live in :mod:`putlab.prob`, functionals in :mod:`putlab.measures`,
bound formulas in :mod:`putlab.bounds` and the optimisers in
:mod:`putlab.solver`.
"""

from .bounds import (
    BoundReport,
    HolderSpec,
    example2_delta_bound,
    example2_put,
    finfo_holder_constants,
    lemma1_bounds,
    lemma1_constants,
    pc_holder_constants,
    theorem1_bound,
    theorem2_bound,
)
from .measures import (
    FGenerator,
    MetricSpec,
    chi_square,
    f_divergence,
    f_information,
    hellinger,
    parse_metric,
    pc_given,
    total_variation,
)
from .prob import (
    Alphabet,
    BallSpec,
    BinaryPQ,
    FullSimplex,
    JointPmf,
    MarginalLowerBound,
    Mechanism,
    SampleSet,
    devroye_radius,
    empirical_from_samples,
    l1_distance,
    merge_rare_symbols,
    pq_joint,
    sample_ball,
)
from .solver import SolveConfig, put_curve, solve_put, solve_put_grid, solve_put_local, solve_robust

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
