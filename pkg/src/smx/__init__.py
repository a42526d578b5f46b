"""Bound states of 1D potential wells via scattering-matrix composition."""

from .errors import (
    DegenerateSliceError,
    DomainError,
    InvalidClosureError,
    NonConvergenceError,
    ParameterError,
    RangeError,
    ReconstructionError,
    ResonanceSingularityError,
    SingularityError,
    SolverError,
)
from .potential import (
    BARRIER,
    CONSTANT,
    LJ_EPSILON_DEFAULT,
    LJ_MINIMUM,
    Closure,
    PotentialModel,
    expand,
    make_builtin,
    make_custom,
)
from .slices import SeriesSolutionPair, SliceSMatrix, local_solutions, slice_smatrix
from .smatrix import (
    CumulativeTrace,
    PhaseFactor,
    SegmentS,
    Slicing,
    barrier_phase,
    close_right,
    identity_segment,
    segment_from_slice,
    star,
    step_phase,
    sweep_halfline,
)
from .spectrum import (
    Bracket,
    EnergyRoot,
    ScanConfig,
    eval_condition,
    refine,
    scan,
    solve_spectrum,
)
from .taylor import PowerSeries, TaylorSeries, taylor_coefficients
from .wavefunction import (
    PiecewiseWavefunction,
    PieceRecord,
    anchor_phase_ratio,
    build_wavefunction,
    count_nodes,
    expectation,
    normalize,
    reconstruct,
    sample,
    std_dev_r,
)

__version__ = "0.1.0"
