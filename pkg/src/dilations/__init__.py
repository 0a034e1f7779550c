"""Numerical certificates and minimal unitary dilations for tuples of
commuting contraction matrices."""

from .core import (
    DEFAULT_TOL,
    BadParams,
    DegreeExceedsTruncation,
    DilationError,
    InvalidCertificate,
    NotC0,
    NotCommuting,
    NotContraction,
    NotHermitian,
    NotPSD,
    NotProjection,
    NotPureShift,
    NotUnitary,
    ShapeMismatch,
    SingularResolvent,
    Tolerances,
    Unsupported,
    adj,
    commutator_norm,
    dmp_completion,
    is_contraction,
    is_projection,
    is_unitary,
    opnorm,
    orthonormal_range_basis,
    psd_sqrt,
)
from .defects import (
    CanonicalSplit,
    ContractionTuple,
    DefectData,
    build_tuple,
    canonical_decomposition,
    defect_data,
    is_c0,
    is_cnu,
)
from .certificates import (
    AdjointCertificate,
    Certificate,
    ConditionReport,
    FundamentalPairs,
    adjoint_transfer,
    assemble_certificate,
    certificate_oracle_search,
    check_adjoint_conditions,
    check_conditions,
    fundamental_pairs,
    make_adjoint_certificate,
    make_certificate,
    solve_fundamental,
)
from .blocks import DilationTuple, TruncatedBlockOperator, interior_norm
from .schaffer import (
    build_isometric,
    build_unitary,
    schaffer_unitary_of_product,
    telescoping_check,
)
from .hardy import (
    CharacteristicSample,
    LinearSymbol,
    bcl_extract,
    bdf_coanalytic_product,
    bdf_product,
    bdf_tuple_check,
    characteristic_sample,
    laurent_op,
    pure_dilation,
    pure_embedding,
    toeplitz_op,
)
from .verify import (
    DilationReport,
    PipelineReport,
    full_pipeline,
    minimality_defect,
    multi_indices,
    verify_dilation,
)
from .generators import generate_instance, shift_compression_data
from .jsonio import ParseError, TupleDocument

__version__ = "0.1.0"
