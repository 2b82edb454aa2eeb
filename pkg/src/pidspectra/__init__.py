"""Partial information decomposition spectra of discrete trivariate systems.

The package decomposes the information a binary output carries about two
inputs into unique, shared and synergistic components plus residual output
entropy, and ships a simulation pipeline that contrasts the spectra of
contextual-modulatory transfer functions with plain arithmetic ones.
"""

__version__ = "0.1.0"

from .dist import (
    AllZeroError,
    ConsistencyError,
    DistributionError,
    InfoSummary,
    JointDist3,
    NegativeMassError,
    entropy,
    entropy_of,
    from_json_dict,
    load_json,
    normalize,
    save_json,
    shannon_summary,
)
from .pid import (
    PidComponents,
    Spectrum,
    UnsupportedMethodError,
    complete_spectrum,
    decompose,
    maxent_pairwise,
    pid_ccs,
    pid_imin,
    specific_information,
)
from .broja import BrojaSolution, NonConvergenceError, pid_broja, transport_min
from .models import (
    InvalidCorrelationError,
    MixtureSpec,
    SampleBatch,
    Scenario,
    UnknownScenarioError,
    mixture_spec,
    sample_bgm,
    sample_sbg,
    scenario,
)
from .transfer import (
    TransferKind,
    UnknownTransferError,
    eval_transfer,
    fit_bias,
    output_prob,
    parse_tag,
    raw_transfer,
    simulate_outputs,
)
from .binning import (
    BinEdges,
    BinningError,
    DegenerateSignError,
    TooFewValuesError,
    bgm_edges,
    build_joint,
    sbg_edges,
)
from .runner import (
    CellConfig,
    GridResult,
    GridRow,
    MissingCellError,
    compare_cells,
    derive_cell_seed,
    expand_grid,
    run_cell,
    run_grid,
    spectrum_quantity,
)
from .report import emit_csv, emit_svg

__all__ = [name for name in dir() if not name.startswith("_")]
