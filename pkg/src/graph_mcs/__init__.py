"""Multi-channel generalized sampling of graph signals."""

from .bench import ExperimentConfig, RecoveryReport, emit_report, emit_signal_dump, run_experiment
from .bridge import (
    BgfbSystem,
    PrCheck,
    Theorem1Report,
    bipartite_qmf_kernels,
    bipartite_spectrum,
    build_bgfb,
    check_pr,
    filterbank_mcs,
    mcs_from_bgfb,
    theorem1_residuals,
    verify_theorem1,
)
from .errors import (
    ConfigError,
    ConnectivityError,
    DegenerateDegreeError,
    DimensionError,
    EdgeListError,
    GraphError,
    GraphMcsError,
    NumericalError,
    PairingError,
)
from .filters import (
    ChebyshevFilter,
    PolynomialFilter,
    SpectralKernel,
    chebyshev_apply,
    chebyshev_fit,
    exact_filter,
    ideal_pair,
    meyer_pair,
    mexican_hat,
    mexican_hat_pair,
    polynomial_filter,
)
from .graph import (
    BipartitePartition,
    Graph,
    laplacian,
    load_edge_list,
    load_partition,
    make_partition,
    random_bipartite_graph,
    random_sensor_graph,
    save_edge_list,
    swiss_roll_graph,
)
from .metrics import mse_db
from .multichannel import (
    CorrectionMatrix,
    McsRecovery,
    McsSystem,
    SubbandOperators,
    assemble_correction,
    recover_mcs,
    recover_mcs_subband,
    sss_two_channel,
    subband_operators,
)
from .sampling import (
    ChannelSpec,
    apply_sampling,
    build_Z,
    check_ds,
    neumann_solve,
    recover_single,
    sss_greedy_exact,
    sss_greedy_neumann,
)
from .signals import SignalDraw, draw_pws, draw_ubp, pws_generators, ubp_generators
from .spectral import SpectralDecomposition, eigendecompose, gft, igft, spectral_clusters

__version__ = "0.1.0"
