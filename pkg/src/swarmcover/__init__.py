"""Swarm dynamic-area-coverage simulator and response-analysis toolkit."""

from swarmcover.area import (
    ShapeSchedule,
    TargetAreaSpec,
    alpha_at,
    boundary_radius,
    field_gradient,
    region_area,
    signed_field,
)
from swarmcover.control import (
    AgentState,
    ControlParams,
    NeighborView,
    coverage_target,
    default_params,
    velocity_command,
)
from swarmcover.engine import (
    SimConfig,
    SimulationBlowupError,
    Snapshot,
    SwarmComposition,
    Trajectory,
    init_swarm,
    mean_speed,
    run,
    step,
)
from swarmcover.metrics import (
    EmptyRegionError,
    MetricSample,
    MetricsConfig,
    coverage_performance,
    default_sensor_radius,
    snapshot_metrics,
    tessellation_performance,
)
from swarmcover.response import (
    FitResult,
    ResponseCurve,
    ResponsePoint,
    cutoff_scaling_check,
    fit_response,
    frequency_sweep,
    response_model,
    time_average_performance,
)

__version__ = "0.1.0"
