"""Network contagion centrality with statistical validation.

Workflow: load a panel of levels, take log returns, estimate a VAR(1)
adjacency matrix over rolling windows, compute Katz-Bonacich style
centrality through the Leontief inverse, and validate every value with
its asymptotic distribution (confidence intervals, Z-tests,
zero-clamping).  A Monte Carlo harness checks the distribution theory
against simulation.
"""

from .centrality import (
    CentralityReport,
    LeontiefKernel,
    debt_rank,
    degree_centrality,
    degree_threshold_p95,
    leontief_kernel,
    node_level_kb,
    propagate_shock,
    system_debt_rank,
    system_level_kb,
)
from .errors import (
    DegenerateStatisticError,
    EstimationError,
    KbnetError,
    NumericalError,
    PanelError,
    StationarityError,
)
from .inference import (
    KBVarianceEngine,
    TestResult,
    test_nonzero,
    test_pairwise,
    validated_node_kb,
    validated_system_kb,
)
from .panel import (
    ReturnPanel,
    TimeSeriesPanel,
    WindowSpec,
    load_panel,
    load_weights,
    log_returns,
    make_windows,
    moving_average,
    write_panel,
)
from .simulate import (
    DEFAULT_A,
    DEFAULT_A_NULL_NODE,
    SimulationConfig,
    SimulationSummary,
    generate_var1,
    qq_points,
    run_monte_carlo,
    size_power_study,
)
from .var import (
    EstimatedNetwork,
    StationarityCertificate,
    estimate_var1,
    sigma_block,
    spectral_radius,
)

__version__ = "0.1.0"
