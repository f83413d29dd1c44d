"""heraldkit: heralded single-photon source statistics with a
photon-number-resolving detector readout.

Closed-form multi-mode click and coincidence probabilities, an exact
Fock-space oracle validating them, the detector's single-photon POVM
element, a time-tag stream simulator with the matching counting pipeline,
and parameter fitting from count data.
"""

__version__ = "0.1.0"

from .errors import (
    BracketError,
    DivergentSumError,
    HeraldError,
    ParameterError,
    StreamOrderError,
    ZeroDenominatorError,
)
from .jsi import (
    JsiGrid,
    SchmidtSpectrum,
    calibrate_phasematch_bandwidth,
    geometric_spectrum,
    read_jsi_csv,
    read_spectrum_csv,
    schmidt_decompose,
    schmidt_number,
    separable_jsi,
    synthesize_jsi,
    write_jsi_csv,
    write_spectrum_csv,
)
from .model import (
    ModelParams,
    ProbabilitySet,
    g2,
    mu_for_g2,
    multiplexed_success,
    p_idler,
    p_idler_multibin,
    p_idler_threshold,
    p_signal,
    p_threefold,
    p_twofold,
    probability_set,
)
from .oracle import (
    MonteCarloResult,
    OracleConfig,
    OracleResult,
    exact_probabilities,
    monte_carlo_probabilities,
    pair_distribution,
    povm_click_probability,
    total_pair_pmf,
)
from .povm import PovmElement, eta_pnr, normalize_pi_one, pi_one_coefficients
from .tags import (
    Channel,
    CoincidenceCounts,
    CountSummary,
    G2Result,
    GeneratorTiming,
    PulseTruth,
    RunConfig,
    TagRecord,
    TagStream,
    count_coincidences,
    counts_from_truth,
    g2_from_counts,
    generate_run,
    read_counts_json,
    read_tags_binary,
    read_tags_csv,
    write_counts_json,
    write_tags_binary,
    write_tags_csv,
)
from .fitting import (
    EfficiencyEstimate,
    TreeDepthFit,
    estimate_efficiencies,
    fit_mu,
    fit_tree_depth,
)
