"""Pure Gibbs state preparation with MPO imaginary-time evolution,
MPS-to-circuit synthesis, and Gibbs-initialized QAOA."""

from .analytics import (
    BoltzmannCurve,
    DenseState,
    EnergyEntropyPoint,
    approximation_ratio,
    boltzmann_curve,
    dephase,
    diagonal_entropy,
    energy_entropy_point,
    exact_gibbs,
    expected_energy,
    free_energy,
    gaussian_state,
    gibbs_from_evolution_time,
    relative_ratio,
)
from .gibbs_quality import (
    GibbsQualityReport,
    amplitude_of,
    quality_from_samples,
    quality_with_scatter,
)
from .mpo_evolution import (
    EvolutionTrace,
    HamiltonianBlocks,
    StepMPO,
    build_blocks,
    build_wI,
    build_wII,
    evolve_step,
    imaginary_time_evolve,
)
from .mps import MPS, canonical_truncate, fidelity
from .problems import (
    Graph,
    IsingHamiltonian,
    Spectrum,
    TspInstance,
    brute_spectrum,
    energy_of,
    maxcut_to_ising,
    random_maxcut,
    random_tsp,
    tsp_to_ising,
)
from .qaoa import QaoaParams, apply_cost_layer, apply_mixer_layer, expectation, landscape_scan, optimize
from .qaoa import run as qaoa_run
from .synthesis import (
    KakDecomposition,
    StaircaseCircuit,
    analytic_layer,
    circuit_to_state,
    kak_decompose,
    synthesize,
    variational_refine,
)
from .expressivity import (
    DistributionMatrix,
    PcaResult,
    envelope_area,
    epsilon_distinct_count,
    normalized_projection_area,
    pca,
    significant_rank,
    sweep_p1,
)

__version__ = "0.1.0"
