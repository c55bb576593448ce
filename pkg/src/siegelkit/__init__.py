"""Computational toolkit for weighted Bergman and Hardy spaces on the
Siegel upper half-space: exact kernel calculus, closed-form constants, a
quadrature oracle, operator-identity checks and a batch verification CLI.
"""

from .geometry import (
    BallPoint,
    SiegelPoint,
    SpaceParams,
    boundary_kernel_constant,
    cayley,
    cayley_inv,
    dilate,
    double_kernel_constant,
    hardy_lift_constant,
    heisenberg_translate,
    kernel_moment_constant,
    origin_i,
    pochhammer,
    poisson_normalization,
    projection_constant,
    rho,
    rho_pair,
)
from .kernels import (
    KernelFn,
    KernelTerm,
    MultiIndex,
    apply_L,
    apply_L_alpha,
    closed_norm,
    evaluate,
    from_json,
    hardy_closed_norm,
    kernel_derivative_constant,
    monomial,
    pure_term,
    to_json,
    wirtinger_d,
)
from .operators import (
    best_norm,
    divergence_profile,
    fubini_majorant,
    norm_equivalence_report,
    project,
    reconstruct,
    reconstruction_residual,
    t_operator,
    uniqueness_check,
)
from .quadrature import (
    QuadResult,
    QuadSpec,
    integrate_ball,
    integrate_bU,
    integrate_sphere,
    integrate_U,
    norm_quad,
)
from .boundary import (
    BoundaryFn,
    MollifierParams,
    boundary_kernel_integral,
    hardy_embedding_check,
    lift,
    lift_isometry_check,
    mollifier,
    poisson_integral,
    volume_change_check,
)
from .harness import HarnessConfig, corpus_default, run_suite
from .reports import CheckReport, EquivalenceReport

__version__ = "0.1.0"
