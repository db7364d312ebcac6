"""Positivity of norm compressions of partitioned PSD matrices."""

from .compression import (
    NormCompression,
    PartitionedMatrix,
    ReductionTrace,
    abs_entries,
    compress,
    compress_m2,
    reduce_theorem1,
    sufficiency_check,
)
from .counterexamples import (
    CounterexampleReport,
    m4_block_lift,
    schatten_example,
    thm2_necessity,
    thompson_search,
)
from .fuzz import draw_trial, random_psd, run_fuzz
from .linalg import (
    PsdVerdict,
    abs_matrix,
    diagonalize_unitary,
    eig_hermitian,
    is_psd,
    polar,
    singular_values,
    zero_pad,
)
from .norms import (
    ConditionBCertificate,
    UINorm,
    condition_b,
    eval_norm,
    largest_flat_prefix,
    normalize,
    parse_norm,
)

__version__ = "0.1.0"
