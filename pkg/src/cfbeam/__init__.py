"""cfbeam: cooperative downlink beamforming for cell-free massive MIMO.

Per-AP block-coordinate WMMSE solvers (sequential and parallel) under
individual AP power budgets, conventional-WMMSE / zero-forcing / matched
filter baselines, a robust expected-rate model driven by pilot-estimation
statistics, independent validation oracles, and a Monte Carlo sweep harness
with a CLI.
"""

from .baselines import (
    DualState,
    mrt_precoder,
    non_robust_view,
    run_conventional,
    wmmse_beam_update,
    zf_precoder,
)
from .estimation import ChannelSet, estimate_variance, sample_channel_set
from .grwmmse import (
    SolverConfig,
    SolverReport,
    SubproblemData,
    build_subproblem,
    build_subproblem_from_coupling,
    coupling_vector,
    power_of_dual,
    random_feasible_init,
    run_parallel,
    run_sequential,
    scaled_norm_solve,
    shifted_solve,
    solve_subproblem,
)
from .harness import (
    ExperimentSpec,
    Instance,
    ResultRecord,
    aggregate,
    db_to_linear,
    emit_csv,
    linear_to_db,
    load_records,
    make_instance,
    run_experiment,
    solve_by_name,
)
from .oracle import dense_shifted_inverse, mc_expected_rate, projected_gradient_qcqp
from .rate_model import (
    WmmseAux,
    expected_rate,
    interference_power,
    mse,
    per_ap_power,
    random_weights,
    surrogate_objective,
    update_aux,
    user_rates,
    weighted_sum_rate,
)
from .scenario import Geometry, NetworkConfig, PilotAssignment, assign_pilots, sample_geometry

__version__ = "0.1.0"
