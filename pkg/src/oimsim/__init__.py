"""oimsim: oscillator Ising machine simulation and stability analysis.

Builds MaxCut-style coupled-phase-oscillator systems from graphs,
enumerates their Ising energy landscapes exhaustively, computes the
largest Lyapunov exponent of every binarized configuration as a
function of the second-harmonic injection strength, and runs
deterministic or noisy phase dynamics to measure which minima the
system actually reaches.
"""

__version__ = "0.1.0"

from ._kernels import backend_name, has_native
from .dynamics import (
    ReadoutResult,
    SimConfig,
    Trajectory,
    energy_trace,
    integrate,
    readout,
    step_deterministic,
    step_sde,
)
from .enumeration import (
    EnergyHistogram,
    GroundStates,
    config_to_index,
    enumerate_energies,
    ground_states,
    index_to_config,
    verify_enumeration,
)
from .errors import (
    CapError,
    GraphFormatError,
    IntegrationError,
    NumericalError,
    OimError,
)
from .experiments import (
    RunMetadata,
    StableSetReport,
    TrialCampaignResult,
    TrialResult,
    ks_campaign,
    run_trials,
    stable_set_report,
    write_report,
)
from .model import (
    CouplingMatrix,
    Graph,
    OimParams,
    coupling_from_graph,
    generate_random_graph,
    ising_energy,
    load_graph,
    local_field,
    lyapunov_energy,
    maxcut_from_energy,
    phase_velocity,
    write_graph,
)
from .stability import (
    EnergyLevelStats,
    StabilityRecord,
    base_spectrum,
    critical_ks,
    energy_level_stats,
    is_equilibrium,
    jacobian,
    jacobian_binarized,
    largest_lyapunov,
    stability_sweep,
    symmetric_eigenvalues,
)
