"""SIR epidemics on two interconnected contact networks.

Spectral epidemic thresholds for coupled layers, node-level mean-field
dynamics, exact stochastic (Gillespie) simulation, and Monte Carlo spillover
experiments that locate phase transitions in spillover probability.
"""

from .errors import (
    BoundaryError,
    CalibrationError,
    ConfigError,
    ConvergenceError,
    CoupledSirError,
    GraphFormatError,
    ParameterError,
    StepSizeError,
    SupercriticalLayerError,
)
from .gillespie import (
    EventLog,
    RealizationOutcome,
    SeedStrategy,
    SimulationEngine,
    ensemble_summary_csv,
    realization_seeds,
    run_ensemble,
    simulate,
)
from .graphs import (
    Graph,
    LayeredNetwork,
    LinkSpec,
    couple_random,
    couple_to_hubs,
    gen_barabasi_albert,
    gen_barabasi_albert_edges,
    gen_erdos_renyi,
    gen_erdos_renyi_gnm,
    gen_watts_strogatz,
    load_graph,
    load_layered_network,
    save_graph,
    save_layered_network,
)
from .meanfield import (
    NodeStates,
    Trajectory,
    default_initial_state,
    integrate,
    linearized_growth_check,
)
from .params import EpidemicParams
from .spectral import (
    ThresholdCurve,
    block_spectral_radius,
    build_ht_operator,
    epidemic_threshold,
    jacobian_leading_eigenvalue,
    layer_spectral_radius,
    spectral_radius,
    threshold_curve,
)
from .spillover import (
    BoundaryResult,
    CalibrationResult,
    SweepResult,
    calibrate_reservoir_rate,
    detect_transition,
    regime_boundary,
    spillover_probability,
    sweep_beta12,
    sweep_links,
    topology_threshold_links,
)

__version__ = "0.1.0"
