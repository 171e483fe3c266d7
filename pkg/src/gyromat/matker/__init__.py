"""Small dense matrix kernels: eigendecomposition, exp/log, Cholesky, Frechet derivatives."""

from gyromat.matker._backend import NAME as BACKEND
from gyromat.matker.core import (
    SPD_FLOOR,
    as_matrix,
    check_spd,
    check_symmetric,
    cholesky,
    commutator,
    diag_part,
    frechet_dexp,
    frechet_dlog,
    half_lower,
    is_spd,
    is_symmetric,
    mat_exp,
    mat_log_spd,
    same_shape,
    spd_invsqrt,
    spd_pow,
    spd_sqrt,
    strict_lower,
    sym_eig,
    symmetrize,
)

__all__ = [
    "BACKEND",
    "SPD_FLOOR",
    "as_matrix",
    "check_spd",
    "check_symmetric",
    "cholesky",
    "commutator",
    "diag_part",
    "frechet_dexp",
    "frechet_dlog",
    "half_lower",
    "is_spd",
    "is_symmetric",
    "mat_exp",
    "mat_log_spd",
    "same_shape",
    "spd_invsqrt",
    "spd_pow",
    "spd_sqrt",
    "strict_lower",
    "sym_eig",
    "symmetrize",
]
