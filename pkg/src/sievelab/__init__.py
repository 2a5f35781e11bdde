"""Cubic large-sieve matrices, GL(3) Hecke data, and norm experiments."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConvergenceError,
    RamifiedError,
    SievelabError,
    TableFormatError,
)
from .eisenstein import (
    EisensteinInt,
    Factorization,
    PrimaryForm,
    canonical_associate,
    divrem,
    enumerate_by_norm,
    factor,
    gcd,
    is_primary,
    is_prime,
    is_squarefree,
    primary_form,
)
from .cubic import (
    CubicSieveConfig,
    CubicSymbolValue,
    SweepPoint,
    build_cubic_sieve_matrix,
    cubic_gram_sweep,
    cubic_symbol,
    export_matrix,
    lambda_q,
    power_residue_oracle,
    primary_squarefree_elements,
    sieve_primary_squarefree,
    symbol_exponent_table,
)
from .hecke import (
    GL2FormData,
    GL3Form,
    SpectralParams,
    eisenstein_form,
    euler_factor_check,
    export_eigenvalue_table,
    hecke_eigenvalue,
    ingest_gl2_table,
    load_eigenvalue_table,
    rankin_selberg_partial,
    satake_cusp_proxy,
    synthetic_gl2_form,
)
from .norms import (
    ChainResult,
    Lemma4Certificate,
    Lemma5Certificate,
    NormReport,
    SieveMatrix,
    build_delta_matrix,
    certify_lemma4,
    certify_lemma5,
    duality_gap,
    exponent_chain,
    exponent_fit,
    operator_norm_sq,
)
from .analytic import (
    BumpWeight,
    GammaRatioSample,
    fourier_l1,
    function_l1_norms,
    gamma_ratio,
    log_gamma_R,
    mellin_weight,
    separation_check,
    stirling_separator,
    stirling_separator_curvature,
)
from .cli import ExperimentConfig, run

import types as _types

__all__ = [
    name
    for name, value in list(globals().items())
    if not name.startswith("_") and not isinstance(value, _types.ModuleType)
]
