"""Quantum stochastic walks on waveguide lattices with absorbing sinks.

Simulates an associative-memory demonstration: a walker injected into a
chain of coupled waveguides drains into whichever absorbing sink array is
closest in Hamming distance, the photonic analogue of Hopfield retrieval.
Includes the segmented detuning-disorder decoherence model, the
directional-coupler calibration math, a classical Hopfield reference, and a
reproducible experiment harness with CSV/JSON/figure reports.
"""

__version__ = "0.1.0"

from .engine import (
    EvolutionResult,
    LindbladSet,
    WalkParams,
    abstract_qsw_system,
    basis_density,
    evolve,
    lindblad_generator,
    purity,
    sink_population,
    site_populations,
    validate_density,
)
from .harness import (
    AbstractWalkModel,
    Criteria,
    GroupSweep,
    PhotonicModel,
    SampleResult,
    ScenarioConfig,
    compare_with_hopfield,
    match_rate,
    run_scenario,
    scenario_correct,
    sweep_groups,
    transfer_efficiency,
)
from .hopfield import (
    HopfieldNetwork,
    energy,
    hebbian_store,
    nearest_stored,
    retrieve,
    update_async,
)
from .network import (
    BinaryPattern,
    Hamiltonian,
    NetworkSpec,
    SinkAttachment,
    build_hamiltonian,
    hamming,
    threshold_patterns,
)
from .photonic import (
    CouplerCalibration,
    CouplerFit,
    DetuningProfile,
    coupler_power_transfer,
    detuning_from_couplings,
    detuning_from_speed,
    effective_coupling,
    ensemble_average,
    ensemble_coherence,
    fit_dephasing_rate,
    fit_effective_coupling,
    piecewise_evolve,
    sample_detuning_profile,
)
