"""Specht-type invariants for localizations of Cowen-Douglas operator tuples.

Models are given by reproducing kernels; everything is computed from finite
jets of the kernel at a point.
"""
from .compare import (
    CompareOptions,
    ComparisonReport,
    ComparisonRequest,
    compare_localizations,
    compare_via_metric,
    grid_points,
    sweep,
)
from .jets import HoloJet, MatrixJet2, hermitian_sqrt, holo_invert, restrict_left, sandwich
from .kernels import (
    BallKernel,
    CallableKernel,
    ConjugateBy,
    DirectSum,
    PowerSeries,
    ProductPolydisc,
    Scale,
    bergman,
    catalog,
    direct_sum,
    jet_at,
    jet_at_numeric,
    scale,
    szego,
    transform,
)
from .localization import (
    BlockGram,
    InvariantSet,
    build_block_gram,
    extract_invariants,
    normalize,
    oracle_invariants_direct,
)
from .specht import EquivalenceVerdict, MatrixTuple, Status, TraceWord, find_certificate, specht_test

__version__ = "0.1.0"
