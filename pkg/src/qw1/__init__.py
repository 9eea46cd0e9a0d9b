"""Quantum Wasserstein-1 distance between channels on composite systems."""
from .channels import (
    Channel,
    CompositeSystem,
    apply_channel,
    channel_from_kraus,
    choi_state_from_channel,
    delta_from_choi_state,
    identity_channel,
    is_neighbouring,
    is_valid,
    kraus_from_channel,
    random_channel,
    reduce_hat,
    reduce_to_subset,
    replacement_channel,
    schrodinger_apply,
    state_channel,
    tensor_ordered,
)
from .gauge import (
    HermitianDifference,
    SolverOptions,
    W1Result,
    reduction_lower_bound,
    state_w1,
    telescope_bound,
    w1_distance,
    w1_norm,
)

__version__ = "0.1.0"
