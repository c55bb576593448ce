"""Symbolic calculus on the kernel-rational function family.

A kernel function is a finite sum of terms

    coeff * conj(z')^gamma' * z_n^k * rho(z, a)^{-s}

with a pole ``a`` in the open half-space and a real exponent ``s >= 0``
(``s = 0`` admits plain polynomials in ``z_n`` and ``conj(z')``, which the
uniqueness procedures need).  The family is closed under the Wirtinger
derivatives ``d/dz_j``, ``d/dz_n`` and under the tangential operators

    L_j = d/dz_j + 2i conj(z_j) d/dz_n   (j < n),      L_n = d/dz_n,

so every derivative below is exact.  For a pure pole power the fixed
Wirtinger convention gives

    d/dz_j rho(.,a)^{-s} = s conj(a_j) rho^{-s-1},
    d/dz_n rho(.,a)^{-s} = (i s / 2)    rho^{-s-1},

both validated against the central finite-difference oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    InvalidInputError,
    ParameterError,
    SiegelPoint,
    boundary_kernel_constant,
    dilate,
    heisenberg_inverse,
    kernel_moment_constant,
    rho,
    rho_pair,
    rho_pair_arr,
)

# Like-term merge tolerance on coefficients (relative to the largest one).
COEFF_MERGE_TOL = 1e-14


class KernelError(ValueError):
    """Base class for kernel-family failures."""


class InvalidFunctionError(KernelError):
    """A term violates the family invariants (e.g. pole outside the domain)."""


class UnsupportedShapeError(KernelError):
    """The requested closed form only exists for a restricted term shape."""


class DivergentNormError(KernelError):
    """The requested norm diverges; integrability precondition fails."""


class InternalConsistencyError(KernelError):
    """The symbolic calculus produced a shape it proved impossible."""


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index alpha = (alpha', alpha_n) with anisotropic weight."""

    alpha_prime: tuple[int, ...]
    alpha_n: int

    def __post_init__(self):
        object.__setattr__(self, "alpha_prime", tuple(int(a) for a in self.alpha_prime))
        if any(a < 0 for a in self.alpha_prime) or self.alpha_n < 0:
            raise InvalidInputError("multi-index entries must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.alpha_prime) + 1

    @property
    def order(self) -> int:
        """Total order |alpha| = |alpha'| + alpha_n."""
        return sum(self.alpha_prime) + self.alpha_n

    @property
    def weight(self) -> float:
        """Anisotropic weight |alpha'|/2 + alpha_n (a half-integer)."""
        return 0.5 * sum(self.alpha_prime) + self.alpha_n

    @staticmethod
    def zero(n: int) -> "MultiIndex":
        return MultiIndex((0,) * (n - 1), 0)

    @staticmethod
    def vertical(n: int, N: int) -> "MultiIndex":
        """The index (0', N) hitting only the last axis."""
        return MultiIndex((0,) * (n - 1), N)


def multi_indices_of_order(n: int, N: int) -> list[MultiIndex]:
    """All alpha in N_0^n with |alpha| = N, in lexicographic order."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == n - 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining + 1):
            rec(prefix + (a,), remaining - a)

    rec((), N)
    out.sort()
    return [MultiIndex(t[:-1], t[-1]) for t in out]


@dataclass(frozen=True)
class KernelTerm:
    """One term coeff * conj(z')^gamma' * z_n^k * rho(z, pole)^{-s}."""

    coeff: complex
    gamma_prime: tuple[int, ...]
    k: int
    pole: SiegelPoint
    s: float

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "gamma_prime", tuple(int(g) for g in self.gamma_prime))
        object.__setattr__(self, "s", float(self.s))
        if len(self.gamma_prime) != self.pole.n - 1:
            raise InvalidFunctionError("gamma' length must match the dimension")
        if any(g < 0 for g in self.gamma_prime) or self.k < 0:
            raise InvalidFunctionError("exponents must be nonnegative")
        if self.s < 0.0:
            raise InvalidFunctionError("pole power must be nonnegative")
        if self.s > 0.0 and rho(self.pole) <= 0.0:
            raise InvalidFunctionError("pole must lie in the open half-space")

    @property
    def n(self) -> int:
        return self.pole.n

    @property
    def is_pure(self) -> bool:
        """Pure pole power: no conjugate monomial and no z_n factor."""
        return all(g == 0 for g in self.gamma_prime) and self.k == 0

    @property
    def is_holomorphic(self) -> bool:
        return all(g == 0 for g in self.gamma_prime)

    def sort_key(self):
        pk = tuple((v.real, v.imag) for v in self.pole.zprime) + (
            self.pole.zn.real,
            self.pole.zn.imag,
        )
        return (pk, self.s, self.gamma_prime, self.k)


class KernelFn:
    """Canonicalized finite sum of kernel terms in a fixed dimension."""

    __slots__ = ("n", "terms", "is_holomorphic", "is_single_pure_term")

    def __init__(self, n: int, terms=()):
        if n < 1:
            raise InvalidFunctionError("dimension must be at least 1")
        self.n = int(n)
        self.terms: tuple[KernelTerm, ...] = _canonicalize(self.n, terms)
        self.is_holomorphic = all(t.is_holomorphic for t in self.terms)
        self.is_single_pure_term = (
            len(self.terms) == 1 and self.terms[0].is_pure and self.terms[0].s > 0.0
        )

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "KernelFn") -> "KernelFn":
        if self.n != other.n:
            raise InvalidFunctionError("dimension mismatch")
        return KernelFn(self.n, self.terms + other.terms)

    def __mul__(self, c) -> "KernelFn":
        c = complex(c)
        return KernelFn(
            self.n,
            [
                KernelTerm(t.coeff * c, t.gamma_prime, t.k, t.pole, t.s)
                for t in self.terms
            ],
        )

    __rmul__ = __mul__

    def __sub__(self, other: "KernelFn") -> "KernelFn":
        return self + (other * -1.0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, KernelFn):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.terms))

    def __repr__(self):
        return f"KernelFn(n={self.n}, {len(self.terms)} terms)"

    # -- evaluation --------------------------------------------------------

    def __call__(self, z: SiegelPoint) -> complex:
        return evaluate(self, z)

    def eval_arr(self, W: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on points of shape (..., n)."""
        W = np.asarray(W, dtype=complex)
        out = np.zeros(W.shape[:-1], dtype=complex)
        for t in self.terms:
            val = np.full(W.shape[:-1], t.coeff, dtype=complex)
            for j, g in enumerate(t.gamma_prime):
                if g:
                    val = val * np.conj(W[..., j]) ** g
            if t.k:
                val = val * W[..., -1] ** t.k
            if t.s:
                val = val * rho_pair_arr(W, t.pole.as_array()) ** (-t.s)
            out += val
        return out


def _canonicalize(n: int, terms) -> tuple[KernelTerm, ...]:
    for t in terms:
        if t.n != n:
            raise InvalidFunctionError("term dimension mismatch")
    merged: dict = {}
    for t in terms:
        key = t.sort_key()
        if key in merged:
            merged[key] = KernelTerm(
                merged[key].coeff + t.coeff, t.gamma_prime, t.k, t.pole, t.s
            )
        else:
            merged[key] = t
    kept = sorted(merged.values(), key=KernelTerm.sort_key)
    scale = max((abs(t.coeff) for t in kept), default=0.0)
    return tuple(t for t in kept if abs(t.coeff) > COEFF_MERGE_TOL * max(scale, 1.0))


def pure_term(pole: SiegelPoint, s: float, coeff=1.0) -> KernelFn:
    """Convenience constructor for coeff * rho(., pole)^{-s}."""
    n = pole.n
    return KernelFn(n, [KernelTerm(coeff, (0,) * (n - 1), 0, pole, s)])


def monomial(n: int, k: int, coeff=1.0, gamma_prime=None) -> KernelFn:
    """Polynomial member coeff * conj(z')^gamma' * z_n^k (zero pole power)."""
    from .geometry import origin_i

    gp = tuple(gamma_prime) if gamma_prime is not None else (0,) * (n - 1)
    return KernelFn(n, [KernelTerm(coeff, gp, k, origin_i(n), 0.0)])


def evaluate(f: KernelFn, z: SiegelPoint) -> complex:
    """Exact evaluation; linear in the coefficients."""
    if z.n != f.n:
        raise InvalidFunctionError("dimension mismatch")
    total = 0.0 + 0.0j
    for t in f.terms:
        val = t.coeff
        for zj, g in zip(z.zprime, t.gamma_prime):
            if g:
                val *= zj.conjugate() ** g
        if t.k:
            val *= z.zn**t.k
        if t.s:
            val *= rho_pair(z, t.pole) ** (-t.s)
        total += val
    return total


# ---------------------------------------------------------------------------
# Exact differentiation
# ---------------------------------------------------------------------------


def _d_term(t: KernelTerm, j: int) -> list[KernelTerm]:
    """Wirtinger derivative d/dz_j of one term; conjugates are constants."""
    n = t.n
    out = []
    if j < n:
        # only the pole power depends on z_j; the conj(a_j) factor is constant
        if t.s:
            out.append(
                KernelTerm(
                    t.coeff * t.s * t.pole.zprime[j - 1].conjugate(),
                    t.gamma_prime,
                    t.k,
                    t.pole,
                    t.s + 1.0,
                )
            )
    else:
        if t.k:
            out.append(KernelTerm(t.coeff * t.k, t.gamma_prime, t.k - 1, t.pole, t.s))
        if t.s:
            out.append(
                KernelTerm(t.coeff * 0.5j * t.s, t.gamma_prime, t.k, t.pole, t.s + 1.0)
            )
    return out


def wirtinger_d(f: KernelFn, j: int) -> KernelFn:
    """Exact symbolic d/dz_j (1-based axis; j = n is the last coordinate)."""
    if not 1 <= j <= f.n:
        raise InvalidInputError("axis index out of range")
    terms = []
    for t in f.terms:
        terms.extend(_d_term(t, j))
    return KernelFn(f.n, terms)


def apply_L(f: KernelFn, j: int) -> KernelFn:
    """Tangential operator L_j = d/dz_j + 2i conj(z_j) d/dz_n; L_n = d/dz_n."""
    if not 1 <= j <= f.n:
        raise InvalidInputError("axis index out of range")
    if j == f.n:
        return wirtinger_d(f, f.n)
    terms = []
    for t in f.terms:
        terms.extend(_d_term(t, j))
        gp = list(t.gamma_prime)
        gp[j - 1] += 1
        for dt in _d_term(t, t.n):
            terms.append(
                KernelTerm(2j * dt.coeff, tuple(gp), dt.k, dt.pole, dt.s)
            )
    return KernelFn(f.n, terms)


def apply_L_alpha(f: KernelFn, alpha: MultiIndex) -> KernelFn:
    """Composition L_1^a1 ... L_n^an, rightmost factor applied first.

    The factors commute on the family, so the order is a reproducibility
    convention, not a mathematical choice.
    """
    if alpha.n != f.n:
        raise InvalidInputError("multi-index dimension mismatch")
    g = f
    for _ in range(alpha.alpha_n):
        g = apply_L(g, f.n)
    for j in range(f.n - 1, 0, -1):
        for _ in range(alpha.alpha_prime[j - 1]):
            g = apply_L(g, j)
    return g


def kernel_derivative_constant(n: int, lam: float, alpha: MultiIndex) -> complex:
    """Constant C with L^alpha rho(., w)^{-(n+1+lam)} = C (conj z' - conj w')^alpha' rho^{-(n+1+lam+|alpha|)}.

    Computed by running the symbolic calculus on a generic pole and reading the
    coefficient off the top monomial; the full expansion is then re-assembled
    from C alone and must match term by term.
    """
    if lam <= -1.0:
        raise ParameterError("kernel derivative constant requires lam > -1")
    if alpha.n != n:
        raise InvalidInputError("multi-index dimension mismatch")
    # generic pole: distinct nonzero coordinates, safely inside the domain
    zp = tuple(0.3 + 0.05 * j + 0.2j * (j + 1) for j in range(n - 1))
    pole = SiegelPoint(zp, 0.7 + 1j * (sum(abs(v) ** 2 for v in zp) + 1.0))
    s = n + 1.0 + lam
    g = apply_L_alpha(pure_term(pole, s), alpha)
    if alpha.order == 0:
        return 1.0 + 0.0j

    target_s = s + alpha.order
    top = None
    for t in g.terms:
        if t.gamma_prime == alpha.alpha_prime and t.k == 0 and t.s == target_s:
            top = t
    if top is None:
        raise InternalConsistencyError("derivative lost the expected top monomial")
    c = top.coeff

    expected_terms = []
    for beta, binom in _binomial_expansion(alpha.alpha_prime):
        # (conj z' - conj w')^alpha' expanded into the monomial basis
        coeff = c * binom
        for j, (bj, aj) in enumerate(zip(beta, alpha.alpha_prime)):
            coeff *= (-pole.zprime[j].conjugate()) ** (aj - bj)
        expected_terms.append(KernelTerm(coeff, beta, 0, pole, target_s))
    expected = KernelFn(n, expected_terms)
    if coefficient_distance(g, expected) > 1e-10 * max(1.0, abs(c)):
        raise InternalConsistencyError(
            "derivative of the kernel does not have the predicted shape"
        )
    return c


def _binomial_expansion(alpha_prime: tuple[int, ...]):
    """Multi-binomial expansion indices beta <= alpha' with their coefficients."""
    out = [((), 1.0)]
    for a in alpha_prime:
        nxt = []
        for beta, c in out:
            for b in range(a + 1):
                nxt.append((beta + (b,), c * math.comb(a, b)))
        out = nxt
    return out


def coefficient_distance(f: KernelFn, g: KernelFn) -> float:
    """Largest coefficient deviation between two canonicalized functions."""
    lhs = {t.sort_key(): t.coeff for t in f.terms}
    rhs = {t.sort_key(): t.coeff for t in g.terms}
    keys = set(lhs) | set(rhs)
    return max((abs(lhs.get(k, 0.0) - rhs.get(k, 0.0)) for k in keys), default=0.0)


# ---------------------------------------------------------------------------
# Closed-form norms (single pure terms only; sums go through quadrature)
# ---------------------------------------------------------------------------


def closed_norm(f: KernelFn, p: float, t: float) -> float:
    """Weighted-volume norm of a single pure term, in closed form.

    Deliberately refuses sums of terms: |f|^p of a sum has no closed form for
    general p, and a silent approximation would defeat the oracle pairing.
    """
    term = _single_pure(f)
    if t <= -1.0:
        raise ParameterError("weight exponent requires t > -1")
    if p * term.s - t <= f.n + 1.0:
        raise DivergentNormError("norm diverges: p s - t <= n + 1")
    moment = kernel_moment_constant(f.n, p * term.s, t)
    return (
        abs(term.coeff) ** p * moment * rho(term.pole) ** (-(p * term.s - t - f.n - 1.0))
    ) ** (1.0 / p)


def hardy_closed_norm(f: KernelFn, p: float) -> float:
    """Hardy norm of a single pure term, via the boundary kernel integral.

    The sup over vertical shifts is attained in the limit because shifting
    the pole up only increases the denominator.
    """
    term = _single_pure(f)
    if p * term.s <= f.n:
        raise DivergentNormError("hardy norm diverges: p s <= n")
    theta = p * term.s - f.n
    const = boundary_kernel_constant(f.n, theta)
    return (abs(term.coeff) ** p * const * rho(term.pole) ** (-theta)) ** (1.0 / p)


def _single_pure(f: KernelFn) -> KernelTerm:
    if not f.is_single_pure_term:
        raise UnsupportedShapeError(
            "closed norms exist only for a single pure pole power; use quadrature"
        )
    return f.terms[0]


# ---------------------------------------------------------------------------
# Exact composition with the automorphisms
# ---------------------------------------------------------------------------


def compose_dilation(f: KernelFn, r: float) -> KernelFn:
    """Exact pullback under the anisotropic dilation (z', z_n) -> (r z', r^2 z_n)."""
    if r <= 0:
        raise ParameterError("dilation factor must be positive")
    terms = []
    for t in f.terms:
        coeff = t.coeff * r ** (sum(t.gamma_prime) + 2 * t.k - 2.0 * t.s)
        pole = dilate(t.pole, 1.0 / r) if t.s else t.pole
        terms.append(KernelTerm(coeff, t.gamma_prime, t.k, pole, t.s))
    return KernelFn(f.n, terms)


def compose_heisenberg(f: KernelFn, u: SiegelPoint) -> KernelFn:
    """Exact pullback f o h_u; only pole powers stay inside the family."""
    terms = []
    for t in f.terms:
        if not t.is_pure:
            raise UnsupportedShapeError(
                "translation pullback is symbolic only for pure pole powers"
            )
        terms.append(
            KernelTerm(t.coeff, t.gamma_prime, t.k, heisenberg_inverse(u, t.pole), t.s)
        )
    return KernelFn(f.n, terms)


# ---------------------------------------------------------------------------
# Finite-difference oracle (independent of the symbolic rules)
# ---------------------------------------------------------------------------


def wirtinger_fd(eval_fn, z: SiegelPoint, j: int, h: float = 1e-5) -> complex:
    """Central finite-difference Wirtinger derivative (1/2)(d/dx - i d/dy)."""
    base = z.as_array()

    def at(delta):
        w = base.copy()
        w[j - 1] += delta
        return eval_fn(SiegelPoint.from_array(w))

    dx = (at(h) - at(-h)) / (2.0 * h)
    dy = (at(1j * h) - at(-1j * h)) / (2.0 * h)
    return 0.5 * (dx - 1j * dy)


def tangential_fd(eval_fn, z: SiegelPoint, j: int, h: float = 1e-5) -> complex:
    """Finite-difference L_j, assembled from the Wirtinger oracle."""
    dn = wirtinger_fd(eval_fn, z, z.n, h)
    if j == z.n:
        return dn
    dj = wirtinger_fd(eval_fn, z, j, h)
    return dj + 2j * z.zprime[j - 1].conjugate() * dn


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def _c2j(v: complex) -> list[float]:
    return [float(v.real), float(v.imag)]


def term_to_json(t: KernelTerm) -> dict:
    return {
        "coeff": _c2j(t.coeff),
        "gamma_prime": list(t.gamma_prime),
        "k": t.k,
        "pole": {
            "zprime": [_c2j(v) for v in t.pole.zprime],
            "zn": _c2j(t.pole.zn),
        },
        "s": t.s,
    }


def to_json(f: KernelFn) -> dict:
    return {"n": f.n, "terms": [term_to_json(t) for t in f.terms]}


def from_json(doc: dict) -> KernelFn:
    n = int(doc["n"])
    terms = []
    for td in doc.get("terms", []):
        pole = SiegelPoint(
            tuple(complex(re, im) for re, im in td["pole"]["zprime"]),
            complex(*td["pole"]["zn"]),
        )
        terms.append(
            KernelTerm(
                complex(*td["coeff"]),
                tuple(td["gamma_prime"]),
                int(td["k"]),
                pole,
                float(td["s"]),
            )
        )
    return KernelFn(n, terms)
