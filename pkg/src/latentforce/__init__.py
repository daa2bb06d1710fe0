"""Force-directed network layouts that maximize a latent-space model likelihood.

Nodes get positions in a low-dimensional Euclidean space plus activity
(alpha) and popularity (beta) scalars.  The probability of a recorded tie
decays with squared latent distance, and the layout simulation integrates
the exact gradient of the log-likelihood, so the converged drawing is a
maximum-likelihood (or, with the Gaussian prior, MAP) embedding rather
than an aesthetic heuristic.

Three observation families share one geometry:

- ``unweighted``: directed or undirected binary ties,
- ``cumulative``: repeated author/action adoption events,
- ``weighted``: ordinal tie strengths through an ordered-logit link.
"""

from latentforce._kernels import available_backends, get_backend, set_backend
from latentforce.forces import (
    ForceField,
    degree_residuals,
    finite_difference_gradient,
    forces,
    three_level_forces_reference,
)
from latentforce.graphs import (
    Action,
    CumulativeGraph,
    Graph,
    GraphFormatError,
    WeightedGraph,
    degree,
    parse_cumulative,
    parse_edge_list,
    serialize_cumulative,
    serialize_edge_list,
)
from latentforce.integrator import (
    IntegratorConfig,
    LayoutResult,
    SimulationDiverged,
    init_state,
    run_layout,
    run_restarts,
)
from latentforce.layoutfile import (
    LayoutDocument,
    document_from_result,
    read_layout,
    state_from_document,
    write_layout,
)
from latentforce.model import (
    FAMILIES,
    LatentState,
    ModelConfig,
    PriorConfig,
    default_cuts,
    level_probability,
    log_prior,
    loglik,
    objective,
    tie_probability,
)
from latentforce.svg import render_svg
from latentforce.synth import (
    GaussianClusterSpec,
    SbmSpec,
    expected_sbm_distance,
    generate_dataset,
    ground_truth_loglik,
    prepare_generating_state,
    sample_latent,
    sample_network,
)
from latentforce.validation import (
    MantelResult,
    center_of_mass_distance,
    distance_matrix,
    gaussian_experiment,
    mantel_test,
    recovery_report,
    sbm_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # backends
    "available_backends",
    "get_backend",
    "set_backend",
    # graphs
    "Action",
    "CumulativeGraph",
    "Graph",
    "GraphFormatError",
    "WeightedGraph",
    "degree",
    "parse_cumulative",
    "parse_edge_list",
    "serialize_cumulative",
    "serialize_edge_list",
    # model
    "FAMILIES",
    "LatentState",
    "ModelConfig",
    "PriorConfig",
    "default_cuts",
    "level_probability",
    "log_prior",
    "loglik",
    "objective",
    "tie_probability",
    # forces
    "ForceField",
    "degree_residuals",
    "finite_difference_gradient",
    "forces",
    "three_level_forces_reference",
    # integrator
    "IntegratorConfig",
    "LayoutResult",
    "SimulationDiverged",
    "init_state",
    "run_layout",
    "run_restarts",
    # synthetic data
    "GaussianClusterSpec",
    "SbmSpec",
    "expected_sbm_distance",
    "generate_dataset",
    "ground_truth_loglik",
    "prepare_generating_state",
    "sample_latent",
    "sample_network",
    # validation
    "MantelResult",
    "center_of_mass_distance",
    "distance_matrix",
    "gaussian_experiment",
    "mantel_test",
    "recovery_report",
    "sbm_sweep",
    # persistence and rendering
    "LayoutDocument",
    "document_from_result",
    "read_layout",
    "render_svg",
    "state_from_document",
    "write_layout",
]
