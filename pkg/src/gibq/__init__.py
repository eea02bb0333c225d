"""Sparse spectral laboratory for norm inflation in the generalized
improved Boussinesq equation on the torus."""

__version__ = "0.1.0"

from .construction import (
    BumpData,
    InflationParams,
    make_bump,
    perturbed_data,
    sample_base_data,
    schedule,
    schedule_from_N,
)
from .flow import (
    InitialPair,
    Trajectory,
    duhamel,
    duhamel_trajectory,
    linear_flow,
)
from .harness import (
    EstimateLedger,
    InflationReport,
    ResonantSplit,
    check_conditions,
    resonant_split,
    run_inflation,
    sweep,
)
from .lattice import (
    FrequencyLattice,
    GridField,
    SpectralField,
    convolve,
    lambda_symbol,
    power_k,
    synthesize,
)
from .norms import BandPartition, NormSpec, band_partition, check_algebra, check_embeddings, norm
from .oracle import convolution_sandwich, rk4_solve, xi1_closed_form
from .series import (
    SeriesAccumulator,
    SeriesTerm,
    fixed_point,
    partial_sum,
    tail_residual,
    tree_term,
    xi_term,
    xi_terms,
)
from .trees import (
    TreeCountTable,
    count_trees,
    enumerate_trees,
    fuss_catalan,
    verify_count_bound,
)
