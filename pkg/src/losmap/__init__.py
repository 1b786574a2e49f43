"""Predicted LoS-maps and proactive relay selection for mmWave V2X networks.

The pipeline: cooperative sensing fuses noisy detections of non-connected
vehicles, a constant-velocity model predicts everything over a short window,
closed-form blockage probabilities turn the predicted geometry into per-link
SNR mixtures, and the resulting availability matrices feed connectivity
analysis plus four relay-assignment solvers (exhaustive, Hungarian, FCFS,
distributed multiplier ascent).
"""

from .channel import (
    ChannelParams,
    GaussianMixtureDb,
    LinkCondition,
    blockage_probability_multi,
    blockage_probability_single,
    classify_link,
    path_loss_mean,
    q_function,
    service_probability,
    snr_distribution,
)
from .experiment import (
    ExperimentSpec,
    ResultRow,
    SensingParams,
    emit,
    load_spec,
    run_experiment,
)
from .geometry import (
    Footprint,
    LinkFrameRect,
    Point2,
    blockage_region,
    segment_intersects_footprint,
    to_link_frame,
)
from .network import (
    AvailabilityMatrix,
    ConnectivityReport,
    adjacency_at,
    average_availability,
    connectivity,
    jacobi_eigenvalues,
    link_mixtures_at,
    relayed_pair_availability,
    second_order,
)
from .prediction import (
    PredictedTrajectory,
    PredictionParams,
    predict,
    predict_window,
    transition_matrix,
)
from .relay import (
    AdmmParams,
    Assignment,
    AssignmentProblem,
    SolverStats,
    admm,
    build_assignment_problem,
    build_relayed_adjacency,
    exhaustive_search,
    fcfs,
    hungarian,
    protocol_message_count,
)
from .scenario import (
    Role,
    ScenarioConfig,
    WorldSnapshot,
    generate,
    highway_config,
    identify_roles,
    intersection_config,
    roundabout_config,
    step,
)
from .sensing import (
    DetectionList,
    ObjectState,
    StateEstimate,
    fuse_detections,
    fuse_estimates,
    initialize_ncav_estimate,
    simulate_detections,
)

__version__ = "0.1.0"
