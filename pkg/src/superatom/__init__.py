"""Driven Rydberg-superatom simulator and photon-correlation toolkit."""

from .params import (
    AtomicInputs,
    PulseSpec,
    SystemParams,
    collective_kappa,
    drive_amplitude,
    mean_photon_number,
    raman_decay_rate,
    tukey_envelope,
)
from .lindblad import (
    IntegrationError,
    SuperatomState,
    evolve,
    liouvillian,
    liouvillian_at,
    output_rate,
    transmission_trace,
)
from .regression import (
    CorrelationGrid,
    binned_reference_map,
    correlation_tensors,
    correlator_G,
    g3_grid,
    normalized_g,
    sandwich_E,
)
from .jacobi import JacobiMap, average_over_R, connected_g3, from_jacobi, to_jacobi
from .bethe import (
    IdealCorrelations,
    ModeFunction,
    asymptotic_psi3,
    bound_state_component,
    flat_mode,
    gaussian_mode,
    greens_scatter_oracle,
    ideal_correlations,
    outgoing_wavefunction,
    phi_integral,
)
from .trajectories import (
    ClickData,
    ClickRecord,
    TrajectoryConfig,
    ensemble_density_checkpoints,
    simulate_ensemble,
    simulate_pulse,
)
from .counting import (
    BinningSpec,
    CoincidenceHistogram,
    coincidence_histogram,
    g3c_jacobi_estimate,
    normalized_correlation,
    rate_histogram,
)

__version__ = "0.1.0"
