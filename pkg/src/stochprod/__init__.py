"""Random products of stochastic matrices and their distributed-computation
applications: ergodicity-coefficient calculus, finite-horizon stochastic
contraction certificates, asynchronous agreement on periodic networks, and
distributed solving of consistent linear systems."""

__version__ = "0.1.0"

from . import errors
from .agreement import (
    AgreementTrace,
    BernoulliClocks,
    HierarchicalPartition,
    PoissonClocks,
    UpdateEvent,
    async_update_matrix,
    hierarchical_partition,
    hierarchical_product,
    hierarchical_sequence,
    hierarchical_word_count,
    simulate_async,
)
from .equations import (
    GraphSequenceModel,
    PartitionedLinearSystem,
    ProjectionSet,
    SolverReport,
    SolverState,
    averaging_matrix,
    error_transition,
    initial_estimate,
    initial_state,
    kernel_projection,
    kernel_projections,
    mixed_matrix_norm,
    run_solver,
    smallest_contracting_window,
    step,
    window_connectivity_probability,
)
from .graphs import (
    DirectedGraph,
    compose,
    graph_of,
    is_rooted,
    is_strongly_connected,
    roots,
)
from .lyapunov import (
    DecayReport,
    FiniteStepCertificate,
    LyapunovFunction,
    SphereGrid,
    SwitchedSystem,
    certify_contraction,
    expected_lyapunov,
    inf_norm,
    monte_carlo_decay,
)
from .matrices import (
    MatrixClass,
    MatrixPattern,
    StochasticMatrix,
    backward_product,
    classify,
    is_markov,
    is_scrambling,
    is_sia,
    pattern_period,
    same_type,
    scrambling_index,
    spread,
    tau,
    validate,
)
from .products import (
    BlockEstimate,
    ProductTrace,
    RateReport,
    block_decay_estimate,
    default_checkpoints,
    find_scrambling_window,
    fit_empirical_rate,
    simulate_product,
    window_rate_bound,
)
from .sequences import (
    FiniteMatrixSet,
    IIDModel,
    MarkovModulatedModel,
    SampledSequence,
    ScriptedModel,
    min_positive_entry,
    sample,
    stationary_distribution,
    trial_seed,
    window_class_probability,
)

__all__ = [name for name in dir() if not name.startswith("_")]
