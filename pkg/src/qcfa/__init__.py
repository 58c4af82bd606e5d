"""Two-way quantum-classical finite automata: simulation and analysis tools."""

from .hardness import (
    DissimilarityGraph,
    HardnessReport,
    LanguageOracle,
    build_dissimilarity_graph,
    communication_bits,
    exhaustive_dfa_crosscheck,
    nonregularity,
)
from .langs import (
    GroupPresentation,
    GrowthTable,
    builtin_groups,
    builtin_oracles,
    growth,
    growth_vs_nonregularity,
    word_problem_oracle,
)
from .machine import (
    MachineFormatError,
    RunStatistics,
    TwoQcfa,
    exact_run,
    fixture_path,
    load_machine,
    monte_carlo_run,
    to_convenient_form,
)
from .quantum import (
    DensityOperator,
    KrausFamily,
    SuperOperator,
    apply_kraus,
    check_completeness,
    choi_matrix,
    choi_trace_norm_bound,
    induced_trace_norm_estimate,
    partial_trace,
    schatten_norm,
)
from .transfer import (
    CrossingSequence,
    PrefixContext,
    SuffixContext,
    TransferOperator,
    accept_profile,
    check_step_channel,
    crossing_sequence,
    dual_transfer_operator,
    feature_vector,
    single_step,
    transfer_operator,
    truncate,
)
from .verify import CheckResult, VerifyConfig, run_all

__version__ = "0.1.0"
