"""Adaptive integration over the half-space, its boundary, the ball and the sphere.

The engine is the independent oracle for every closed-form identity in the
package, so it is built for reproducibility first and speed second:

* tensor tanh-sinh rules for total real dimension <= 4 (half-space dimensions
  n <= 2), with per-axis variable transformations that move each unbounded
  coordinate onto a finite interval and cluster nodes double-exponentially at
  the singular endpoints;
* scrambled-Sobol quasi-Monte Carlo for n >= 3, with the error estimated from
  independent randomizations of one recorded seed;
* fixed chunking and an exactly-rounded final reduction (math.fsum), so the
  result is bitwise independent of how work is scheduled.

Half-space integrals use the shear coordinates ``w' in C^{n-1}``,
``w_n = x + i(|w'|^2 + r)`` with ``x`` real and ``r > 0``.  The map has unit
Jacobian and makes the defining function an exact coordinate, ``rho(w) = r``,
so singular weights ``rho^t`` never suffer cancellation.  Integrands over the
half-space therefore receive both the points and the exact ``rho`` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .geometry import ParameterError

SCHEME_TANH_SINH = "tensor-tanh-sinh"
SCHEME_QMC = "quasi-monte-carlo"

# Nodes mapped beyond this magnitude are dropped; integrands must decay fast
# enough that the truncated tail is far below every stated tolerance.
COORD_CAP = 1e14

_CHUNK = 1 << 18


class QuadratureError(RuntimeError):
    """Configuration or evaluation failure inside the integration engine."""


@dataclass(frozen=True)
class QuadSpec:
    """Scheme, refinement, truncation maps and convergence targets.

    ``truncation`` records, per unbounded coordinate kind, which named
    substitution maps it to a finite interval: ``line`` (all of R) admits
    ``tan`` and ``rational``; ``ray`` ((0, inf), singular end at 0) admits
    ``tan`` and ``exp``.
    """

    scheme: str = SCHEME_TANH_SINH
    level: int = 4
    sample_count: int = 4096
    truncation: tuple[tuple[str, str], ...] = (("line", "tan"), ("ray", "tan"))
    target_rel_tol: float = 1e-8
    max_evaluations: int = 80_000_000
    seed: int = 20260801
    qmc_replicates: int = 8

    def __post_init__(self):
        if self.scheme not in (SCHEME_TANH_SINH, SCHEME_QMC):
            raise ParameterError(f"unknown quadrature scheme {self.scheme!r}")
        if self.level < 1 or self.sample_count < 1:
            raise ParameterError("refinement parameters must be positive")
        maps = dict(self.truncation)
        if maps.get("line") not in ("tan", "rational"):
            raise ParameterError("line truncation must be 'tan' or 'rational'")
        if maps.get("ray") not in ("tan", "exp"):
            raise ParameterError("ray truncation must be 'tan' or 'exp'")

    @property
    def line_map(self) -> str:
        return dict(self.truncation)["line"]

    @property
    def ray_map(self) -> str:
        return dict(self.truncation)["ray"]

    def validate_dimension(self, real_dim: int):
        """Tensor rules are capped at 4 real dimensions; QMC takes over above."""
        if self.scheme == SCHEME_TANH_SINH and real_dim > 4:
            raise ParameterError(
                "tensor tanh-sinh is limited to 4 real dimensions; use QMC"
            )

    @staticmethod
    def for_dimension(n: int, rel_tol: float | None = None, **overrides) -> "QuadSpec":
        """Default spec for half-space dimension n (QMC is forced for n >= 3)."""
        if n <= 1:
            base = QuadSpec(level=5, target_rel_tol=1e-9)
        elif n == 2:
            base = QuadSpec(level=3, target_rel_tol=1e-5)
        else:
            base = QuadSpec(scheme=SCHEME_QMC, sample_count=1 << 13,
                            target_rel_tol=1e-3)
        if rel_tol is not None:
            base = replace(base, target_rel_tol=rel_tol)
        return replace(base, **overrides) if overrides else base

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "level": self.level,
            "sample_count": self.sample_count,
            "truncation": dict(self.truncation),
            "target_rel_tol": self.target_rel_tol,
            "max_evaluations": self.max_evaluations,
            "seed": self.seed,
            "qmc_replicates": self.qmc_replicates,
        }

    @staticmethod
    def from_json(doc: dict) -> "QuadSpec":
        kw = dict(doc)
        if "truncation" in kw:
            kw["truncation"] = tuple(sorted(kw["truncation"].items()))
        return QuadSpec(**kw)


@dataclass
class QuadResult:
    """Value, error estimate and convergence flag of one integral."""

    value: complex
    error_estimate: float
    evaluations: int
    converged: bool

    @property
    def real(self) -> float:
        return self.value.real

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error_estimate": self.error_estimate,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# tanh-sinh axes
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _ts_raw(level: int, t_max: float):
    """Raw tanh-sinh data on (-1, 1): nodes u, weights, endpoint distances.

    The distances 1 -/+ u are computed from exp(-2|s|) directly so that nodes
    double-exponentially close to the endpoints keep full relative accuracy.
    """
    h = 2.0 ** (-level)
    kmax = int(math.floor(t_max / h))
    t = h * np.arange(-kmax, kmax + 1)
    s = 0.5 * math.pi * np.sinh(t)
    u = np.tanh(s)
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    e = np.exp(-2.0 * np.abs(s))
    near = 2.0 * e / (1.0 + e)  # distance to the approached endpoint
    d_hi = np.where(s >= 0, near, 2.0 - near)  # 1 - u
    d_lo = np.where(s < 0, near, 2.0 - near)  # 1 + u
    return u, w, d_lo, d_hi


def _axis_line(level: int, map_name: str):
    """Axis over all of R.  Returns (coords, weights)."""
    if map_name == "tan":
        u, w, d_lo, d_hi = _ts_raw(level, 4.0)
        # x = tan(pi u / 2), evaluated through the endpoint distances
        x = np.where(
            u >= 0,
            1.0 / np.tan(0.5 * math.pi * d_hi),
            -1.0 / np.tan(0.5 * math.pi * d_lo),
        )
        small = np.abs(u) < 0.5
        x[small] = np.tan(0.5 * math.pi * u[small])
        wt = w * 0.5 * math.pi * (1.0 + x * x)
    elif map_name == "rational":
        u, w, d_lo, d_hi = _ts_raw(level, 3.8)
        denom = d_lo * d_hi  # 1 - u^2, stable
        x = u / denom
        wt = w * (1.0 + u * u) / denom**2
    else:
        raise ParameterError(f"unknown line map {map_name!r}")
    keep = np.isfinite(x) & np.isfinite(wt) & (np.abs(x) <= COORD_CAP)
    return x[keep], wt[keep]


def _axis_ray(level: int, map_name: str):
    """Axis over (0, inf) with the singular endpoint at 0 kept exact."""
    if map_name == "tan":
        u, w, d_lo, d_hi = _ts_raw(level, 4.6)
        theta_lo = 0.25 * math.pi * d_lo  # theta near 0
        theta_hi = 0.25 * math.pi * d_hi  # pi/2 - theta
        r = np.where(u <= 0, np.tan(theta_lo), 1.0 / np.tan(theta_hi))
        wt = w * 0.25 * math.pi * (1.0 + r * r)
    elif map_name == "exp":
        x, wx = _axis_line(level, "tan")
        with np.errstate(over="ignore"):
            r = np.exp(x)
        wt = wx * r
    else:
        raise ParameterError(f"unknown ray map {map_name!r}")
    keep = np.isfinite(r) & np.isfinite(wt) & (r > 0.0) & (r <= COORD_CAP)
    return r[keep], wt[keep]


def _axis_finite(level: int, a: float, b: float, t_max: float = 3.0):
    """Plain tanh-sinh on (a, b); endpoint-rounded nodes are dropped."""
    u, w, d_lo, d_hi = _ts_raw(level, t_max)
    half = 0.5 * (b - a)
    x = np.where(u >= 0, b - half * d_hi, a + half * d_lo)
    wt = w * half
    keep = (x > a) & (x < b)
    return x[keep], wt[keep]


# ---------------------------------------------------------------------------
# Deterministic tensor-product evaluation
# ---------------------------------------------------------------------------


def _fsum_complex(parts) -> complex:
    return complex(
        math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts)
    )


def _tensor_pass(axes, assemble, g) -> tuple[complex, int]:
    """One full tensor-product sweep, chunked with a fixed layout."""
    sizes = [len(ax[0]) for ax in axes]
    total = int(np.prod(sizes))
    parts = []
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        multi = np.unravel_index(idx, sizes)
        coords = [axes[d][0][multi[d]] for d in range(len(axes))]
        wt = axes[0][1][multi[0]]
        for d in range(1, len(axes)):
            wt = wt * axes[d][1][multi[d]]
        vals = np.asarray(g(*assemble(coords)), dtype=complex)
        prod = vals * wt
        bad = ~np.isfinite(prod)
        if bad.any():
            # endpoint-rounded overflow nodes carry negligible true mass
            prod = np.where(bad, 0.0, prod)
        parts.append(complex(np.sum(prod)))
    return _fsum_complex(parts), total


def _tensor_integrate(build_axes, assemble, g, spec: QuadSpec) -> QuadResult:
    values: list[complex] = []
    value = 0.0 + 0.0j
    err = math.inf
    evals = 0
    converged = False
    for level in range(1, spec.level + 1):
        axes = build_axes(level)
        n_pts = int(np.prod([len(ax[0]) for ax in axes]))
        if evals + n_pts > spec.max_evaluations:
            break
        value, used = _tensor_pass(axes, assemble, g)
        evals += used
        values.append(value)
        err = _de_error_estimate(values)
        if err <= spec.target_rel_tol * abs(value) or err <= 1e-14:
            converged = True
            if level < spec.level:
                break
    return QuadResult(value, err if math.isfinite(err) else abs(value), evals, converged)


def _de_error_estimate(values: list[complex]) -> float:
    """Error estimate for the last entry of a double-exponential refinement.

    The plain difference of the last two levels estimates the error of the
    coarser one; under the squared-per-level decay of tanh-sinh the finer
    level is ahead by roughly the squared contraction factor, which is what
    the extrapolated term captures.  The plain difference is kept as a cap.
    """
    if len(values) < 2:
        return math.inf
    d_last = abs(values[-1] - values[-2])
    if len(values) < 3:
        return d_last
    d_prev = abs(values[-2] - values[-3])
    if d_prev <= 0.0:
        return d_last
    contraction = min(d_last / d_prev, 1.0)
    return d_last * contraction**2


# ---------------------------------------------------------------------------
# QMC evaluation
# ---------------------------------------------------------------------------

_QMC_RAY_POWER = 3  # u^kappa-type endpoint flattening for weights rho^t, t > -2/3


def _qmc_map_line(u: np.ndarray):
    x = np.tan(math.pi * (u - 0.5))
    return x, math.pi * (1.0 + x * x)


def _qmc_map_ray(u: np.ndarray):
    base = np.tan(0.5 * math.pi * u)
    r = base**_QMC_RAY_POWER
    jac = (
        _QMC_RAY_POWER
        * base ** (_QMC_RAY_POWER - 1)
        * 0.5
        * math.pi
        * (1.0 + base * base)
    )
    return r, jac


def _qmc_map_finite(u: np.ndarray, a: float, b: float):
    return a + (b - a) * u, np.full_like(u, b - a)


def _qmc_integrate(kinds, assemble, g, spec: QuadSpec) -> QuadResult:
    """Scrambled-Sobol estimate with replicate-based error control."""
    d = len(kinds)
    m = max(6, int(math.ceil(math.log2(spec.sample_count))))
    means = []
    evals = 0
    for rep in range(spec.qmc_replicates):
        sob = qmc.Sobol(d, scramble=True, seed=spec.seed + 7919 * rep)
        U = sob.random_base2(m)
        coords, wt = [], None
        ok = np.ones(U.shape[0], dtype=bool)
        for j, kind in enumerate(kinds):
            u = U[:, j]
            if kind == "line":
                x, jac = _qmc_map_line(u)
            elif kind == "ray":
                x, jac = _qmc_map_ray(u)
            else:
                x, jac = _qmc_map_finite(u, kind[1], kind[2])
            ok &= np.isfinite(x) & np.isfinite(jac) & (np.abs(x) <= COORD_CAP)
            coords.append(x)
            wt = jac if wt is None else wt * jac
        coords = [c[ok] for c in coords]
        wt = wt[ok]
        vals = np.asarray(g(*assemble(coords)), dtype=complex) * wt
        vals = np.where(np.isfinite(vals), vals, 0.0)
        means.append(complex(np.sum(vals)) / U.shape[0])
        evals += U.shape[0]
        if evals > spec.max_evaluations:
            break
    arr = np.array(means)
    value = complex(arr.mean())
    err = float(np.abs(arr - value).std(ddof=1) if len(arr) > 1 else np.inf)
    err /= math.sqrt(max(len(arr) - 1, 1))
    converged = err <= spec.target_rel_tol * abs(value) or err <= 1e-14
    return QuadResult(value, err, evals, converged)


# ---------------------------------------------------------------------------
# Domain integrators
# ---------------------------------------------------------------------------


def integrate_U(g, spec: QuadSpec, n: int, center=None, scale: float = 1.0) -> QuadResult:
    """Integral over the half-space in the unit-Jacobian shear coordinates.

    The integrand is called as ``g(W, rho)`` with ``W`` an (m, n) complex
    array of points and ``rho`` their exact defining-function values.

    ``center`` (a domain point) and ``scale`` adapt the coordinate frame to
    the integrand: the grid is stretched by the parabolic dilation of height
    ``scale`` and moved by the inverse translation taking ``(0', i scale)``
    to ``center``.  Both maps preserve the half-space and rho exactly, so
    this only re-labels the truncation, never the integral; it keeps kernels
    peaked at interior points resolvable by a fixed refinement budget.
    """
    real_dim = 2 * n
    spec.validate_dimension(real_dim)
    if center is not None or scale != 1.0:
        from .geometry import heisenberg_inverse_arr

        root = math.sqrt(scale)
        jac = scale ** (n + 1)
        inner = g

        def g_framed(W, r):
            V = W.copy()
            if scale != 1.0:
                V[:, :-1] *= root
                V[:, -1] *= scale
                r = scale * r
            if center is not None:
                V = heisenberg_inverse_arr(center, V)
            return jac * np.asarray(inner(V, r), dtype=complex)

        g = g_framed

    def assemble(coords):
        m = coords[0].shape[0]
        W = np.empty((m, n), dtype=complex)
        absq = 0.0
        for j in range(n - 1):
            W[:, j] = coords[2 * j] + 1j * coords[2 * j + 1]
            absq = absq + coords[2 * j] ** 2 + coords[2 * j + 1] ** 2
        x, r = coords[-2], coords[-1]
        W[:, -1] = x + 1j * (absq + r)
        return W, r

    if spec.scheme == SCHEME_TANH_SINH:
        def build(level):
            line = _axis_line(level, spec.line_map)
            ray = _axis_ray(level, spec.ray_map)
            return [line] * (2 * (n - 1) + 1) + [ray]

        return _tensor_integrate(build, assemble, g, spec)
    kinds = ["line"] * (2 * (n - 1) + 1) + ["ray"]
    return _qmc_integrate(kinds, assemble, g, spec)


def integrate_bU(g, spec: QuadSpec, n: int, center=None, scale: float = 1.0) -> QuadResult:
    """Boundary integral in the parametrization (z', t) -> (z', t + i|z'|^2).

    ``center``/``scale`` adapt the frame exactly as in the volume integral;
    translations and parabolic dilations preserve the boundary, with the
    dilation scaling the boundary measure by ``scale^n``.
    """
    real_dim = 2 * n - 1
    spec.validate_dimension(real_dim)
    if center is not None or scale != 1.0:
        from .geometry import heisenberg_inverse_arr

        root = math.sqrt(scale)
        jac = scale**n
        inner = g

        def g_framed(U):
            V = U.copy()
            if scale != 1.0:
                V[:, :-1] *= root
                V[:, -1] *= scale
            if center is not None:
                V = heisenberg_inverse_arr(center, V)
            return jac * np.asarray(inner(V), dtype=complex)

        g = g_framed

    def assemble(coords):
        m = coords[0].shape[0]
        U = np.empty((m, n), dtype=complex)
        absq = 0.0
        for j in range(n - 1):
            U[:, j] = coords[2 * j] + 1j * coords[2 * j + 1]
            absq = absq + coords[2 * j] ** 2 + coords[2 * j + 1] ** 2
        U[:, -1] = coords[-1] + 1j * absq
        return (U,)

    if spec.scheme == SCHEME_TANH_SINH:
        def build(level):
            line = _axis_line(level, spec.line_map)
            return [line] * (2 * n - 1)

        return _tensor_integrate(build, assemble, g, spec)
    return _qmc_integrate(["line"] * (2 * n - 1), assemble, g, spec)


def _sphere_axes_meta(n: int):
    """Torus-parametrization axes of the unit sphere and the measure density.

    Angles run over (-pi, pi) so the Cayley singularity at -e_n sits at axis
    endpoints, where tanh-sinh clusters its nodes.
    """
    if n == 1:
        kinds = [("finite", -math.pi, math.pi)]
        density = 1.0 / (2.0 * math.pi)
    else:
        kinds = [("finite", -math.pi, math.pi)] * n
        kinds += [("finite", 0.0, 1.0)] * (n - 1)
        density = math.exp(math.lgamma(n)) / (2.0 * math.pi) ** n
    return kinds, density


def _sphere_points(coords, n: int):
    """Map torus coordinates to sphere points; returns (Zeta, extra_jacobian)."""
    m = coords[0].shape[0]
    Zeta = np.empty((m, n), dtype=complex)
    if n == 1:
        Zeta[:, 0] = np.exp(1j * coords[0])
        return Zeta, np.ones(m)
    thetas = coords[:n]
    vs = list(coords[n:])
    # map the open cube onto the simplex v_1 + ... + v_{n-1} <= 1
    scaled = []
    jac = np.ones(m)
    remaining = np.ones(m)
    for j in range(n - 1):
        jac = jac * remaining
        scaled.append(remaining * vs[j])
        remaining = remaining * (1.0 - vs[j])
    radii = [np.sqrt(np.maximum(s, 0.0)) for s in scaled] + [
        np.sqrt(np.maximum(remaining, 0.0))
    ]
    for j in range(n):
        Zeta[:, j] = radii[j] * np.exp(1j * thetas[j])
    return Zeta, jac


def integrate_sphere(g, spec: QuadSpec, n: int) -> QuadResult:
    """Integral against the normalized surface measure (total mass 1)."""
    kinds, density = _sphere_axes_meta(n)
    real_dim = len(kinds)
    spec.validate_dimension(real_dim)

    def assemble(coords):
        Zeta, jac = _sphere_points(coords, n)
        return Zeta, jac * density

    def wrapped(Zeta, factor):
        return np.asarray(g(Zeta), dtype=complex) * factor

    if spec.scheme == SCHEME_TANH_SINH:
        def build(level):
            return [_axis_finite(level, a, b) for _, a, b in kinds]

        return _tensor_integrate(build, assemble, wrapped, spec)
    return _qmc_integrate(kinds, assemble, wrapped, spec)


def integrate_ball(g, spec: QuadSpec, n: int) -> QuadResult:
    """Lebesgue-volume integral over the unit ball via polar times sphere."""
    kinds, density = _sphere_axes_meta(n)
    kinds = [("finite", 0.0, 1.0)] + kinds
    real_dim = len(kinds)
    spec.validate_dimension(real_dim)
    area = 2.0 * math.pi**n / math.exp(math.lgamma(n))  # surface of S^{2n-1}

    def assemble(coords):
        radial = coords[0]
        Zeta, jac = _sphere_points(coords[1:], n)
        Xi = Zeta * radial[:, None]
        return Xi, jac * density * area * radial ** (2 * n - 1)

    def wrapped(Xi, factor):
        return np.asarray(g(Xi), dtype=complex) * factor

    if spec.scheme == SCHEME_TANH_SINH:
        def build(level):
            return [_axis_finite(level, a, b) for _, a, b in kinds]

        return _tensor_integrate(build, assemble, wrapped, spec)
    return _qmc_integrate(kinds, assemble, wrapped, spec)


def integrate_interval(g, a: float, b: float, level: int = 6) -> QuadResult:
    """Plain 1-d tanh-sinh on (a, b); endpoint singularities are welcome."""
    spec = QuadSpec(level=level, target_rel_tol=1e-12)

    def build(lv):
        return [_axis_finite(lv, a, b)]

    def assemble(coords):
        return (coords[0],)

    return _tensor_integrate(build, assemble, g, spec)


# ---------------------------------------------------------------------------
# Norms by quadrature
# ---------------------------------------------------------------------------


@dataclass
class NormEstimate:
    """A norm value together with the quadrature diagnostics behind it."""

    value: float
    error_estimate: float
    evaluations: int
    converged: bool
    divergent: bool = False
    details: dict = field(default_factory=dict)


def norm_quad(
    f, p: float, t: float, spec: QuadSpec, n: int,
    transform=None, center=None, scale: float = 1.0,
) -> NormEstimate:
    """Weighted-volume norm by quadrature.

    ``f`` is a KernelFn or any object with ``eval_arr``; ``transform`` is an
    optional point map (e.g. a Heisenberg translation) applied before
    evaluation, used for the invariance diagnostics.  ``center``/``scale``
    adapt the grid frame (see ``integrate_U``).
    """

    def g(W, rho_exact):
        pts = transform(W) if transform is not None else W
        vals = np.abs(f.eval_arr(pts)) ** p
        return vals * rho_exact**t

    res = integrate_U(g, spec, n, center=center, scale=scale)
    total = res.value.real
    if not res.converged and abs(total) > 1e6 * max(res.error_estimate, 1.0):
        return NormEstimate(math.inf, math.inf, res.evaluations, False, divergent=True)
    value = max(total, 0.0) ** (1.0 / p)
    return NormEstimate(
        value, res.error_estimate, res.evaluations, res.converged,
        details={"integral": total},
    )


def hardy_norm_quad(
    f, p: float, spec: QuadSpec, n: int, eps_grid=None, center=None
) -> NormEstimate:
    """Hardy norm as a supremum over a decreasing grid of vertical shifts.

    On a monotone grid the limit is recovered by first-order Richardson
    extrapolation of the last two values; otherwise the grid maximum is
    reported as a heuristic and flagged in the details.
    """
    if eps_grid is None:
        eps_grid = [2.0**-k for k in range(13)]
    values = []
    evals = 0
    converged = True
    for eps in eps_grid:
        def g(U, _eps=eps):
            shifted = U.copy()
            shifted[:, -1] = shifted[:, -1] + 1j * _eps
            return np.abs(f.eval_arr(shifted)) ** p

        res = integrate_bU(g, spec, n, center=center)
        values.append(res.value.real)
        evals += res.evaluations
        converged &= res.converged
    first = next((v for v in values if v > 0), 0.0)
    if first and values[-1] > 1e6 * first and values[-1] > values[-2] > values[-3]:
        return NormEstimate(math.inf, math.inf, evals, False, divergent=True)
    monotone = all(b >= a * (1.0 - 1e-9) for a, b in zip(values, values[1:]))
    best = max(values)
    if monotone and len(values) >= 2:
        best = max(best, 2.0 * values[-1] - values[-2])
    return NormEstimate(
        max(best, 0.0) ** (1.0 / p),
        abs(values[-1] - values[-2]) if len(values) > 1 else math.inf,
        evals,
        converged,
        details={"grid_values": values, "monotone": monotone},
    )
