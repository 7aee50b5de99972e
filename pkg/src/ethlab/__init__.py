"""ethlab: exact-diagonalization laboratory for thermalization measures."""

from .errors import (
    ConvergenceFailure,
    DimensionLimit,
    EthLabError,
    InternalConsistencyError,
    InvalidSpec,
    NumericalError,
    ShellEmpty,
    SingularLocalState,
    UsageError,
)
from .spinchain import ChainSpec, SiteOperator, build_hamiltonian, embed_site_operator, translation_operator
from .spectral import (
    EnergyShell,
    EnsembleState,
    Spectrum,
    diagonalize,
    diagonalize_chain,
    energy_shell,
    make_ensemble,
    mean_energy,
    solve_beta_for_energy,
    spectral_histogram,
)
from .reduced import (
    BlockSpec,
    TransitionBlock,
    block,
    mutual_information,
    reduce_ensemble,
    reduce_joint,
    reduce_transition,
    von_neumann_entropy,
)
from .measures import (
    LocalState,
    MeasureRecord,
    OffdiagStats,
    RescaledObservable,
    ShellStats,
    TradeoffReport,
    TypicalityReport,
    WeakEthReport,
    d1_measure,
    d2_measure,
    d3_measure,
    local_state,
    measure_record,
    offdiag_stats,
    rescaled_observable,
    shell_stats,
    tradeoff_report,
    tradeoff_rhs,
    typicality,
    v_measure,
    v_measure_bruteforce,
    weak_eth_delta,
)
from .avgobs import (
    AveragedTransition,
    AvgTradeoffReport,
    AvgTypicalityReport,
    averaged_transition,
    avg_tradeoff_report,
    avg_typicality,
    chain_blocks,
    correlation_term,
    d1_avg_equality_check,
    v_avg,
    v_avg_bruteforce,
)

__version__ = "0.1.0"
