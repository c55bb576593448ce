"""Geometry of the Siegel upper half-space and its special-function constants.

The half-space ``U = {z in C^n : Im z_n > |z'|^2}`` is described by the
defining function ``rho(z) = Im z_n - |z'|^2`` and its sesquiholomorphic
extension ``rho(z, w) = (i/2)(conj(w_n) - z_n) - z' . conj(w')``.  Everything
downstream (kernel calculus, quadrature, operator checks) is built on the
functions in this module.

Convention, fixed once for the whole package: the Wirtinger derivative
``d/dz_j`` treats every conjugate coordinate as a constant.  Complex powers of
``rho(z, w)`` always use the principal branch, which is safe because
``Re rho(z, w) >= (rho(z) + rho(w))/2 > 0`` on ``U x U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Boundary membership is decided up to this relative tolerance.
BOUNDARY_RTOL = 1e-12


class GeometryError(ValueError):
    """Base class for geometry-level failures."""


class InvalidInputError(GeometryError):
    """Non-finite or structurally invalid input."""


class DomainError(GeometryError):
    """A point is outside the domain required by the operation."""


class SingularityError(GeometryError):
    """Evaluation at the Cayley singularity -e_n."""


class ParameterError(GeometryError):
    """A constant was requested outside its validity region."""


def _as_complex_tuple(values) -> tuple[complex, ...]:
    out = tuple(complex(v) for v in values)
    if any(not (math.isfinite(v.real) and math.isfinite(v.imag)) for v in out):
        raise InvalidInputError("non-finite coordinate")
    return out


@dataclass(frozen=True)
class SiegelPoint:
    """A point ``z = (z', z_n)`` of ``C^n`` tagged with domain predicates."""

    zprime: tuple[complex, ...]
    zn: complex

    def __post_init__(self):
        object.__setattr__(self, "zprime", _as_complex_tuple(self.zprime))
        zn = complex(self.zn)
        if not (math.isfinite(zn.real) and math.isfinite(zn.imag)):
            raise InvalidInputError("non-finite coordinate")
        object.__setattr__(self, "zn", zn)

    @property
    def n(self) -> int:
        return len(self.zprime) + 1

    @property
    def in_domain(self) -> bool:
        return rho(self) > 0.0

    @property
    def on_boundary(self) -> bool:
        return abs(rho(self)) <= BOUNDARY_RTOL * (1.0 + abs(self.zn))

    def as_array(self) -> np.ndarray:
        return np.array(self.zprime + (self.zn,), dtype=complex)

    @staticmethod
    def from_array(arr) -> "SiegelPoint":
        arr = np.asarray(arr, dtype=complex)
        return SiegelPoint(tuple(arr[:-1]), complex(arr[-1]))


def origin_i(n: int) -> SiegelPoint:
    """The base point (0', i), the image of the ball center under Cayley."""
    return SiegelPoint((0j,) * (n - 1), 1j)


@dataclass(frozen=True)
class BallPoint:
    """A point of the closed unit ball of C^n."""

    xi: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", _as_complex_tuple(self.xi))
        if self.norm() > 1.0 + 1e-12:
            raise DomainError("point outside the closed unit ball")

    @property
    def n(self) -> int:
        return len(self.xi)

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self.xi))

    @property
    def interior(self) -> bool:
        return self.norm() < 1.0

    @property
    def is_cayley_singularity(self) -> bool:
        """True at -e_n = (0', -1), where the Cayley map blows up."""
        return abs(self.xi[-1] + 1.0) <= 1e-14 and all(
            abs(v) <= 1e-14 for v in self.xi[:-1]
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.xi, dtype=complex)


# ---------------------------------------------------------------------------
# Defining function and pairing
# ---------------------------------------------------------------------------


def rho(z: SiegelPoint) -> float:
    """Defining function Im z_n - |z'|^2; positive exactly on the domain."""
    return z.zn.imag - sum(abs(v) ** 2 for v in z.zprime)


def rho_pair(z: SiegelPoint, w: SiegelPoint) -> complex:
    """Sesquiholomorphic pairing (i/2)(conj(w_n) - z_n) - z'.conj(w').

    Satisfies ``rho_pair(z, z) == rho(z)`` and conjugate symmetry; its real
    part dominates ``(rho(z) + rho(w))/2`` so principal powers are safe.
    """
    if z.n != w.n:
        raise InvalidInputError("dimension mismatch")
    dot = sum(a * b.conjugate() for a, b in zip(z.zprime, w.zprime))
    return 0.5j * (w.zn.conjugate() - z.zn) - dot


def rho_arr(W: np.ndarray) -> np.ndarray:
    """Vectorized rho over an array of points with shape (..., n)."""
    W = np.asarray(W, dtype=complex)
    return W[..., -1].imag - np.sum(np.abs(W[..., :-1]) ** 2, axis=-1)


def rho_pair_arr(Z, W) -> np.ndarray:
    """Vectorized pairing; Z and W broadcast against each other on (..., n)."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    dot = np.sum(Z[..., :-1] * np.conj(W[..., :-1]), axis=-1)
    return 0.5j * (np.conj(W[..., -1]) - Z[..., -1]) - dot


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------


def heisenberg_translate(z: SiegelPoint, u: SiegelPoint) -> SiegelPoint:
    """Affine automorphism h_z(u); moves z itself to (0', i rho(z)).

    Preserves the pairing, rho, and Lebesgue volume.
    """
    if not z.in_domain:
        raise DomainError("translation parameter must lie in the domain")
    if z.n != u.n:
        raise InvalidInputError("dimension mismatch")
    zp = z.zprime
    up = tuple(a - b for a, b in zip(u.zprime, zp))
    dot = sum(a * b.conjugate() for a, b in zip(u.zprime, zp))
    absq = sum(abs(v) ** 2 for v in zp)
    un = u.zn - z.zn.real - 2j * dot + 1j * absq
    return SiegelPoint(up, un)


def heisenberg_inverse(z: SiegelPoint, v: SiegelPoint) -> SiegelPoint:
    """Inverse translation: the point u with h_z(u) = v."""
    if not z.in_domain:
        raise DomainError("translation parameter must lie in the domain")
    zp = z.zprime
    up = tuple(a + b for a, b in zip(v.zprime, zp))
    dot = sum(a * b.conjugate() for a, b in zip(v.zprime, zp))
    absq = sum(abs(v_) ** 2 for v_ in zp)
    un = v.zn + z.zn.real + 2j * dot + 1j * absq
    return SiegelPoint(up, un)


def heisenberg_translate_arr(z: SiegelPoint, U: np.ndarray) -> np.ndarray:
    """Vectorized h_z over points U of shape (..., n)."""
    U = np.asarray(U, dtype=complex)
    zp = np.array(z.zprime, dtype=complex)
    out = np.empty_like(U)
    out[..., :-1] = U[..., :-1] - zp
    dot = np.sum(U[..., :-1] * np.conj(zp), axis=-1)
    out[..., -1] = U[..., -1] - z.zn.real - 2j * dot + 1j * np.sum(np.abs(zp) ** 2)
    return out


def heisenberg_inverse_arr(z: SiegelPoint, V: np.ndarray) -> np.ndarray:
    """Vectorized inverse translation over points V of shape (..., n)."""
    V = np.asarray(V, dtype=complex)
    zp = np.array(z.zprime, dtype=complex)
    out = np.empty_like(V)
    out[..., :-1] = V[..., :-1] + zp
    dot = np.sum(V[..., :-1] * np.conj(zp), axis=-1)
    out[..., -1] = V[..., -1] + z.zn.real + 2j * dot + 1j * np.sum(np.abs(zp) ** 2)
    return out


def dilate(z: SiegelPoint, r: float) -> SiegelPoint:
    """Anisotropic dilation (z', z_n) -> (r z', r^2 z_n); scales rho by r^2."""
    if r <= 0:
        raise ParameterError("dilation factor must be positive")
    return SiegelPoint(tuple(r * v for v in z.zprime), r * r * z.zn)


def cayley(xi: BallPoint) -> SiegelPoint:
    """Biholomorphism of the unit ball onto the half-space."""
    if xi.is_cayley_singularity:
        raise SingularityError("Cayley transform is singular at -e_n")
    denom = 1.0 + xi.xi[-1]
    zp = tuple(v / denom for v in xi.xi[:-1])
    zn = 1j * (1.0 - xi.xi[-1]) / denom
    return SiegelPoint(zp, zn)


def cayley_inv(z: SiegelPoint) -> BallPoint:
    """Inverse Cayley map; defined on the closure (z_n = -i never occurs there)."""
    denom = 1j + z.zn
    if abs(denom) < 1e-300:
        raise SingularityError("inverse Cayley transform is singular at z_n = -i")
    xi = tuple(2j * v / denom for v in z.zprime) + ((1j - z.zn) / denom,)
    return BallPoint(xi)


def cayley_arr(Xi: np.ndarray) -> np.ndarray:
    """Vectorized Cayley transform over ball points of shape (..., n)."""
    Xi = np.asarray(Xi, dtype=complex)
    denom = 1.0 + Xi[..., -1]
    out = np.empty_like(Xi)
    out[..., :-1] = Xi[..., :-1] / denom[..., None]
    out[..., -1] = 1j * (1.0 - Xi[..., -1]) / denom
    return out


def cayley_inv_arr(Z: np.ndarray) -> np.ndarray:
    """Vectorized inverse Cayley transform over half-space points."""
    Z = np.asarray(Z, dtype=complex)
    denom = 1j + Z[..., -1]
    out = np.empty_like(Z)
    out[..., :-1] = 2j * Z[..., :-1] / denom[..., None]
    out[..., -1] = (1j - Z[..., -1]) / denom
    return out


# ---------------------------------------------------------------------------
# Space parameters
# ---------------------------------------------------------------------------

MEASURE_WEIGHTED_VOLUME = "weighted-volume"  # rho^t dV
MEASURE_INVARIANT = "invariant"  # d tau = rho^{-n-1} dV, housed for completeness


@dataclass(frozen=True)
class SpaceParams:
    """Exponent bundle (p, t, lambda) with the validity predicates used below."""

    p: float
    t: float
    lam: float
    measure: str = MEASURE_WEIGHTED_VOLUME

    def __post_init__(self):
        if not 1.0 <= self.p < math.inf:
            raise ParameterError("p must lie in [1, infinity)")
        if self.t <= -1.0:
            raise ParameterError("t must exceed -1")
        if self.measure not in (MEASURE_WEIGHTED_VOLUME, MEASURE_INVARIANT):
            raise ParameterError(f"unknown measure tag {self.measure!r}")

    def reproduction_valid(self) -> bool:
        """Parameter window in which the projection reproduces the space."""
        if self.p > 1.0:
            return self.lam > (self.t + 1.0) / self.p - 1.0
        return self.lam >= self.t

    def projection_bounded(self) -> bool:
        """Window in which the projection is bounded on the weighted space."""
        return self.p * (self.lam + 1.0) > self.t + 1.0

    def derivative_shift_valid(self, N: int) -> bool:
        """Validity of the order-N weighted-derivative representation."""
        return self.p * (self.lam + N + 1.0) > self.t + N * self.p + 1.0


# ---------------------------------------------------------------------------
# Constants (all through log-Gamma; direct Gamma products overflow early)
# ---------------------------------------------------------------------------


def pochhammer(a: float, k: int) -> float:
    """Rising factorial a (a+1) ... (a+k-1), with the empty product equal 1."""
    if k < 0:
        raise ParameterError("pochhammer order must be nonnegative")
    out = 1.0
    for j in range(k):
        out *= a + j
    return out


def projection_constant(n: int, lam: float) -> float:
    """Normalizing constant Gamma(n+1+lam) / (4 pi^n Gamma(1+lam))."""
    if lam <= -1.0:
        raise ParameterError("projection order requires lam > -1")
    return math.exp(
        math.lgamma(n + 1.0 + lam) - math.lgamma(1.0 + lam) - _log_4pin(n)
    )


def double_kernel_constant(n: int, r: float, s: float, t: float) -> float:
    """Closed-form constant of the weighted two-kernel volume integral.

    Requires r, s > 0, t > -1 and r + s - t > n + 1.
    """
    if r <= 0.0:
        raise ParameterError("double kernel constant requires r > 0")
    if s <= 0.0:
        raise ParameterError("double kernel constant requires s > 0")
    if t <= -1.0:
        raise ParameterError("double kernel constant requires t > -1")
    if r + s - t <= n + 1.0:
        raise ParameterError("double kernel constant requires r + s - t > n + 1")
    return math.exp(
        _log_4pin(n)
        + math.lgamma(1.0 + t)
        + math.lgamma(r + s - t - n - 1.0)
        - math.lgamma(r)
        - math.lgamma(s)
    )


def kernel_moment_constant(n: int, s: float, t: float) -> float:
    """Closed-form constant of the absolute-kernel moment over the half-space.

    Requires t > -1 and s - t > n + 1 (otherwise the moment diverges).
    """
    if t <= -1.0:
        raise ParameterError("kernel moment requires t > -1")
    if s - t <= n + 1.0:
        raise ParameterError("kernel moment requires s - t > n + 1")
    return math.exp(
        _log_4pin(n)
        + math.lgamma(1.0 + t)
        + math.lgamma(s - t - n - 1.0)
        - 2.0 * math.lgamma(s / 2.0)
    )


def poisson_normalization(n: int) -> float:
    """Mass normalization (n-1)! / (4 pi^n) of the boundary Poisson kernel."""
    return math.exp(math.lgamma(n) - _log_4pin(n))


def boundary_kernel_constant(n: int, theta: float) -> float:
    """Closed-form constant of the boundary kernel integral, theta > 0."""
    if theta <= 0.0:
        raise ParameterError("boundary kernel constant requires theta > 0")
    return math.exp(
        _log_4pin(n)
        + math.lgamma(theta)
        - 2.0 * math.lgamma((n + theta) / 2.0)
    )


def hardy_lift_constant(n: int, p: float) -> float:
    """Normalization (4 pi^n / (n-1)!)^{1/p} making the ball lift an isometry."""
    if p <= 0.0:
        raise ParameterError("hardy lift constant requires p > 0")
    return math.exp((_log_4pin(n) - math.lgamma(n)) / p)


def _log_4pin(n: int) -> float:
    return math.log(4.0) + n * math.log(math.pi)


# ---------------------------------------------------------------------------
# Random sampling (property tests and randomized identity checks)
# ---------------------------------------------------------------------------


def sample_domain_arr(
    rng: np.random.Generator, n: int, m: int, scale: float = 1.0
) -> np.ndarray:
    """m random interior points as an (m, n) complex array."""
    zp = scale * (rng.standard_normal((m, n - 1)) + 1j * rng.standard_normal((m, n - 1)))
    x = scale * rng.standard_normal(m)
    r = scale * rng.exponential(1.0, m) + 1e-6
    out = np.empty((m, n), dtype=complex)
    out[:, :-1] = zp
    out[:, -1] = x + 1j * (np.sum(np.abs(zp) ** 2, axis=1) + r)
    return out


def sample_closure_arr(
    rng: np.random.Generator, n: int, m: int, scale: float = 1.0
) -> np.ndarray:
    """Random closure points: interior points plus an exact-boundary fraction."""
    out = sample_domain_arr(rng, n, m, scale)
    on_bdry = rng.random(m) < 0.3
    zp = out[:, :-1]
    out[on_bdry, -1] = out[on_bdry, -1].real + 1j * np.sum(
        np.abs(zp[on_bdry]) ** 2, axis=1
    )
    return out
