"""Remote steering, CP-map certification and no-signaling tests of quantum dynamics."""

from .channels import (
    ChoiMatrix,
    KrausChannel,
    LinearMapSpec,
    RawMatrix,
    apply,
    choi_from_kraus,
    extend_and_apply,
    is_completely_positive,
    is_positive_sampled,
    is_trace_preserving,
    kraus_from_choi,
    random_channel,
)
from .signaling_lab import (
    DynamicsMap,
    SignalingReport,
    builtin_nonlinear,
    evolve_ensemble,
    helstrom,
    linearity_residual,
    signaling_test,
    simulate_experiment,
)
from .state_core import (
    BipartiteState,
    DensityMatrix,
    Ensemble,
    ProjectiveMeasurement,
    PureState,
    SchmidtDecomposition,
    conditional_state,
    ensemble_density,
    joint_probability,
    partial_trace,
    purify,
    random_density,
    random_pure,
    random_unitary,
    schmidt,
    tensor,
    trace_distance,
)
from .steering import SteeringProtocol, build_steering, random_decomposition, verify_steering

__version__ = "0.1.0"
