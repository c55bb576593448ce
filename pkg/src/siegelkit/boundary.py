"""Hardy-space boundary theory: Poisson integrals, the ball lift, mollifiers.

The boundary carries the measure pushed forward from ``C^{n-1} x R`` by
``(z', t) -> (z', t + i|z'|^2)``.  For kernel-rational functions the boundary
trace is literal evaluation, the Hardy norm has a closed form, and the Cayley
lift ``c_{n,p} (1 + xi_n)^{-2n/p} f(Phi(xi))`` is an exact isometry onto the
ball Hardy space, which the checks here verify by sphere quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ParameterError,
    SiegelPoint,
    boundary_kernel_constant,
    cayley_arr,
    cayley_inv_arr,
    hardy_lift_constant,
    kernel_moment_constant,
    poisson_normalization,
    rho,
    rho_pair_arr,
)
from .kernels import DivergentNormError, KernelFn, hardy_closed_norm
from .quadrature import (
    NormEstimate,
    QuadResult,
    QuadSpec,
    integrate_ball,
    integrate_bU,
    integrate_sphere,
    norm_quad,
)
from .reports import CheckReport


@dataclass(frozen=True)
class BoundaryFn:
    """A function on the boundary: a kernel-rational trace or a raw sampler."""

    kernel: KernelFn | None = None
    sampler: object = None  # callable on (m, n) boundary point arrays

    def eval_arr(self, U: np.ndarray) -> np.ndarray:
        if self.kernel is not None:
            return self.kernel.eval_arr(U)
        return np.asarray(self.sampler(U), dtype=complex)

    @staticmethod
    def trace(f: KernelFn) -> "BoundaryFn":
        return BoundaryFn(kernel=f)

    @staticmethod
    def constant(n: int, value=1.0) -> "BoundaryFn":
        return BoundaryFn(sampler=lambda U: np.full(U.shape[0], complex(value)))


@dataclass(frozen=True)
class MollifierParams:
    """Index k and decay order N of one mollifier; r_k = 1 - 1/k."""

    k: int
    N: int

    def __post_init__(self):
        if self.k < 1 or self.N < 1:
            raise ParameterError("mollifier indices must be positive")

    @property
    def r(self) -> float:
        return 1.0 - 1.0 / self.k


# ---------------------------------------------------------------------------
# Poisson theory
# ---------------------------------------------------------------------------


def poisson_integral(
    fb: BoundaryFn, z: SiegelPoint, spec: QuadSpec | None = None
) -> QuadResult:
    """Poisson integral of a boundary function at an interior point."""
    n = z.n
    if not z.in_domain:
        raise ParameterError("poisson integral requires an interior point")
    if spec is None:
        spec = QuadSpec.for_dimension(n)
    z_arr = z.as_array()
    const = poisson_normalization(n) * rho(z) ** n

    def g(U):
        return (
            const
            * np.abs(rho_pair_arr(z_arr, U)) ** (-2.0 * n)
            * fb.eval_arr(U)
        )

    scale = min(max(rho(z), 1e-2), 1e2)
    return integrate_bU(g, spec, n, center=z, scale=scale)


def boundary_kernel_integral(
    z: SiegelPoint, theta: float, spec: QuadSpec | None = None
):
    """Boundary kernel integral: quadrature value and its closed form."""
    if theta <= 0.0:
        raise ParameterError("boundary kernel integral requires theta > 0")
    n = z.n
    if spec is None:
        spec = QuadSpec.for_dimension(n)
    z_arr = z.as_array()

    def g(U):
        return np.abs(rho_pair_arr(z_arr, U)) ** (-(n + theta))

    scale = min(max(rho(z), 1e-2), 1e2)
    res = integrate_bU(g, spec, n, center=z, scale=scale)
    closed = boundary_kernel_constant(n, theta) * rho(z) ** (-theta)
    return res, closed


def pointwise_bound_report(
    f: KernelFn,
    p: float,
    z_grid,
    spec: QuadSpec | None = None,
    check_id: str = "pointwise-bound",
    suite: str = "appendix",
) -> CheckReport:
    """Empirical constant of the interior growth bound rho^{-n/p} ||f||.

    The comparison constant is not explicit, so the report asserts finiteness
    and records the grid supremum of |f(z)| rho(z)^{n/p} / ||f||.
    """
    norm = hardy_best_norm(f, p, spec)
    if not math.isfinite(norm.value) or norm.value <= 0:
        return CheckReport.predicate(
            check_id, suite, f.n, passed=False,
            details={"reason": "inadmissible hardy norm"},
        )
    sup = 0.0
    for z in z_grid:
        val = abs(f(z)) * rho(z) ** (f.n / p) / norm.value
        sup = max(sup, val)
    return CheckReport.predicate(
        check_id,
        suite,
        f.n,
        passed=math.isfinite(sup),
        params={"p": p, "grid": len(list(z_grid))},
        computed=sup,
        details={"hardy_norm": norm.value},
    )


def hardy_best_norm(f: KernelFn, p: float, spec: QuadSpec | None = None) -> NormEstimate:
    """Hardy norm through the closed form when available."""
    from .quadrature import hardy_norm_quad

    if f.is_zero:
        return NormEstimate(0.0, 0.0, 0, True)
    if f.is_single_pure_term:
        try:
            return NormEstimate(hardy_closed_norm(f, p), 0.0, 0, True,
                                details={"method": "closed"})
        except DivergentNormError:
            return NormEstimate(math.inf, 0.0, 0, True, divergent=True)
    if spec is None:
        spec = QuadSpec.for_dimension(f.n)
    poles = [(abs(t.coeff), t.pole) for t in f.terms if t.s > 0.0]
    center = max(poles, key=lambda item: item[0])[1] if poles else None
    return hardy_norm_quad(f, p, spec, f.n, center=center)


# ---------------------------------------------------------------------------
# The Cayley lift to the ball
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallLift:
    """The normalized pullback of a half-space function to the unit ball."""

    f: KernelFn
    p: float

    @property
    def n(self) -> int:
        return self.f.n

    def eval_arr(self, Xi: np.ndarray) -> np.ndarray:
        Xi = np.asarray(Xi, dtype=complex)
        Z = cayley_arr(Xi)
        factor = hardy_lift_constant(self.n, self.p) * (
            1.0 + Xi[..., -1]
        ) ** (-2.0 * self.n / self.p)
        return factor * self.f.eval_arr(Z)


def lift(f: KernelFn, p: float) -> BallLift:
    """Ball function xi -> c_{n,p} (1 + xi_n)^{-2n/p} f(Phi(xi))."""
    if p <= 0:
        raise ParameterError("lift exponent must be positive")
    return BallLift(f, p)


def ball_hardy_norm(
    lifted: BallLift, spec: QuadSpec, k_max: int = 10
) -> NormEstimate:
    """Ball Hardy norm via sphere means at radii 1 - 2^{-k}.

    On the pure-term corpus the radial means increase, so the last grid value
    is a certified lower bound and first-order Richardson supplies the limit.
    """
    values = []
    evals = 0
    converged = True
    for k in range(k_max + 1):
        r = 1.0 - 2.0 ** (-k) if k else 0.5

        def g(Zeta, _r=r):
            return np.abs(lifted.eval_arr(Zeta * _r)) ** lifted.p

        res = integrate_sphere(g, spec, lifted.n)
        values.append(res.value.real)
        evals += res.evaluations
        converged &= res.converged
    monotone = all(b >= a * (1.0 - 1e-9) for a, b in zip(values, values[1:]))
    best = max(values)
    if monotone and len(values) >= 2:
        best = max(best, 2.0 * values[-1] - values[-2])
    return NormEstimate(
        max(best, 0.0) ** (1.0 / lifted.p),
        abs(values[-1] - values[-2]) if len(values) > 1 else math.inf,
        evals,
        converged,
        details={"radial_values": values, "monotone": monotone},
    )


def lift_isometry_check(
    f: KernelFn,
    p: float,
    spec: QuadSpec | None = None,
    tolerance: float = 1e-4,
    check_id: str = "lift-isometry",
    suite: str = "appendix",
) -> CheckReport:
    """Ball Hardy norm of the lift against the half-space Hardy norm.

    Also verifies the boundary measure-change identity behind the isometry:
    the weighted sphere integral of the boundary trace matches the boundary
    norm once the lift normalization is applied.
    """
    n = f.n
    if spec is None:
        spec = QuadSpec.for_dimension(n)
    hs = hardy_best_norm(f, p, spec)
    lifted = lift(f, p)
    ball = ball_hardy_norm(lifted, spec)
    rel = abs(ball.value - hs.value) / hs.value if hs.value else abs(ball.value)

    # measure change on the boundary sphere, c_{n,p}^p included
    cnp = hardy_lift_constant(n, p)

    def g(Zeta):
        Z = cayley_arr(Zeta)
        return (
            cnp**p
            * np.abs(f.eval_arr(Z)) ** p
            * np.abs(1.0 + Zeta[..., -1]) ** (-2.0 * n)
        )

    sphere = integrate_sphere(g, spec, n)
    boundary_ref = hs.value**p
    rel_measure = abs(sphere.value.real - boundary_ref) / boundary_ref

    return CheckReport.predicate(
        check_id,
        suite,
        n,
        passed=(rel <= tolerance and rel_measure <= tolerance),
        params={"p": p},
        computed=ball.value,
        tolerance=tolerance,
        evaluations=ball.evaluations + sphere.evaluations,
        details={
            "halfspace_norm": hs.value,
            "ball_norm": ball.value,
            "rel_error": rel,
            "measure_change_rel_error": rel_measure,
        },
    )


# ---------------------------------------------------------------------------
# Mollifiers
# ---------------------------------------------------------------------------


def mollifier(params: MollifierParams, z: SiegelPoint) -> complex:
    """Mollifier g_k(z): a shrunk ball automorphism power pulled to the closure.

    Bounded by one on the closure and tending to one pointwise as k grows.
    """
    return complex(mollifier_arr(params, z.as_array()[None, :])[0])


def mollifier_arr(params: MollifierParams, Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    xi_n = params.r * cayley_inv_arr(Z)[..., -1]
    return ((params.r + xi_n) / (1.0 + params.r * xi_n)) ** params.N


def mollifier_decay_check(
    f: KernelFn,
    p: float,
    params: MollifierParams,
    Z_grid: np.ndarray,
    spec: QuadSpec | None = None,
    check_id: str = "mollifier-decay",
    suite: str = "appendix",
) -> CheckReport:
    """Decay bound |z_n + i|^N |g_k(z) f(z + i/k)| <= 2^N k^{n/p + N} ||f||.

    Checked literally on a grid: for the corpus the hidden comparison
    constant of the interior growth bound is below one, so the literal
    inequality holds.
    """
    n = f.n
    norm = hardy_best_norm(f, p, spec)
    Z = np.asarray(Z_grid, dtype=complex)
    shifted = Z.copy()
    shifted[..., -1] = shifted[..., -1] + 1j / params.k
    fk = mollifier_arr(params, Z) * f.eval_arr(shifted)
    lhs = np.abs(Z[..., -1] + 1j) ** params.N * np.abs(fk)
    bound = 2.0**params.N * params.k ** (n / p + params.N) * norm.value
    worst = float(np.max(lhs) / bound)
    return CheckReport.predicate(
        check_id,
        suite,
        n,
        passed=bool(np.all(lhs <= bound)),
        params={"p": p, "k": params.k, "N": params.N, "grid": int(Z.shape[0])},
        computed=worst,
        tolerance=1.0,
        details={"bound": bound, "hardy_norm": norm.value},
    )


# ---------------------------------------------------------------------------
# Volume change and the embedding
# ---------------------------------------------------------------------------


def volume_change_check(
    f: KernelFn,
    q: float,
    spec: QuadSpec | None = None,
    tolerance: float = 1e-3,
    check_id: str = "volume-ratio",
    suite: str = "appendix",
) -> CheckReport:
    """Cayley pullback of the volume: the ball-side integral is exactly 1/4.

    Both sides are computed by quadrature (the half-space side through the
    closed moment when the function is a pure term).
    """
    n = f.n
    if spec is None:
        spec = QuadSpec.for_dimension(n)

    def g(Xi):
        Z = cayley_arr(Xi)
        return (
            np.abs(f.eval_arr(Z)) ** q
            * np.abs(1.0 + Xi[..., -1]) ** (-2.0 * (n + 1))
        )

    ball = integrate_ball(g, spec, n)
    if f.is_single_pure_term:
        term = f.terms[0]
        halfspace = (
            abs(term.coeff) ** q
            * kernel_moment_constant(n, q * term.s, 0.0)
            * rho(term.pole) ** (-(q * term.s - n - 1.0))
        )
        evals = ball.evaluations
    else:
        est = norm_quad(f, q, 0.0, spec, n)
        halfspace = est.value**q
        evals = ball.evaluations + est.evaluations
    ratio = ball.value.real / halfspace if halfspace else math.inf
    return CheckReport.compare(
        check_id,
        suite,
        n,
        computed=ratio,
        reference=0.25,
        tolerance=tolerance,
        params={"q": q},
        evaluations=evals,
        details={"ball_integral": ball.value.real, "halfspace_integral": halfspace},
    )


def hardy_embedding_check(
    f: KernelFn,
    p: float,
    spec: QuadSpec | None = None,
    check_id: str = "hardy-embedding",
    suite: str = "appendix",
) -> CheckReport:
    """Hardy membership forces membership in the larger weighted space.

    The embedding constant is not explicit; the report asserts finiteness of
    the target norm and records the ratio.
    """
    n = f.n
    hs = hardy_best_norm(f, p, spec)
    if not math.isfinite(hs.value):
        return CheckReport(
            check_id=check_id, suite=suite, n=n, skipped=True,
            skip_reason="divergent hardy norm; input inadmissible",
        )
    q = (n + 1.0) * p / n
    from .operators import best_norm

    target = best_norm(f, q, 0.0, spec)
    ratio = target.value / hs.value if hs.value else math.inf
    return CheckReport.predicate(
        check_id,
        suite,
        n,
        passed=math.isfinite(target.value),
        params={"p": p, "q": q},
        computed=ratio,
        details={"hardy_norm": hs.value, "bergman_norm": target.value},
    )
