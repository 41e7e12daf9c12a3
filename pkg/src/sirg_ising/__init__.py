"""Ising models on sparse inhomogeneous random graphs.

Graph sampling with spin-dependent kernels, empirical measures and their
rate function, exact and Glauber partition-function evaluation, and the
limiting thermodynamics with brute-force cross-checks.
"""

from .errors import (
    DEGENERATE,
    ConstraintLost,
    DomainError,
    EmptyGraph,
    EstimateDegenerate,
    IdentityViolation,
    KernelInvalid,
    NoCriticalPoint,
    NoRoot,
    ShapeError,
    SirgError,
    SizeLimit,
)
from .graph import (
    SpinnedGraph,
    TiltSpec,
    h_tilde,
    radon_nikodym_forms,
    radon_nikodym_log,
    sample_graph,
    sample_tilted_graph,
    tilted_edge_probability,
    tilted_spin_law,
)
from .measures import (
    PairMeasure,
    ProbeResult,
    SpinMeasure,
    empirical_measures,
    hC_divergence,
    ldp_decay_probe,
    rate_function,
    reference_pair_measure,
    relative_entropy,
    total_variation,
)
from .model import (
    BlockKernel,
    ConstantKernel,
    CustomKernel,
    EffectiveKernel,
    Kernel,
    ModelParams,
    ProductKernel,
    edge_probability,
    effective_kernel,
    energetic_preference_residual,
    parse_kernel,
    solve_field,
    solve_field_plus,
)
from .partition import (
    annealed_log_partition_exact,
    boltzmann_distribution_exact,
    glauber_sample,
    glauber_transition_matrix,
    hamiltonian,
    pressure_finite,
    quenched_log_partition,
)
from .thermo import (
    FieldPolicy,
    ThermoPoint,
    closed_form_pressure,
    critical_beta,
    internal_energy_paper,
    magnetization_paper,
    observables_fd,
    specific_heat_paper,
    sweep,
    sweep_to_csv,
    thermo_point,
    variational_pressure,
)

__version__ = "0.1.0"
