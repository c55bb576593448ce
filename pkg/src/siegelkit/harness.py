"""Batch verification harness: corpus, check registry, runner, summaries.

Every identity the package implements is wrapped as one named check that
produces a ``CheckReport``.  Check ids are stable descriptive strings, so
reports from different runs and refactors line up.  The runner may fan checks
out over a thread pool; reports are keyed and sorted by id, which makes the
emitted JSON-lines byte-identical across worker counts (timing aside).
"""

from __future__ import annotations

import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import boundary as bd
from . import operators as ops
from .geometry import (
    SiegelPoint,
    boundary_kernel_constant,
    cayley_arr,
    cayley_inv_arr,
    dilate,
    double_kernel_constant,
    heisenberg_translate,
    heisenberg_translate_arr,
    kernel_moment_constant,
    origin_i,
    rho,
    rho_arr,
    rho_pair_arr,
    sample_closure_arr,
    sample_domain_arr,
)
from .geometry import pochhammer
from .kernels import (
    KernelFn,
    MultiIndex,
    apply_L,
    apply_L_alpha,
    closed_norm,
    evaluate,
    from_json,
    kernel_derivative_constant,
    monomial,
    pure_term,
    tangential_fd,
    to_json,
    wirtinger_d,
)
from .quadrature import QuadSpec, integrate_U, integrate_bU
from .reports import CheckReport, write_jsonl

SUITES = (
    "identities",
    "reproducing",
    "reconstruction",
    "uniqueness",
    "equivalence",
    "appendix",
)

OUTPUT_ENV_VAR = "SIEGELKIT_OUT"


@dataclass(frozen=True)
class HarnessConfig:
    """Run configuration; every field is recorded in the report stream."""

    dimensions: tuple[int, ...] = (1,)
    suites: tuple[str, ...] = ("all",)
    corpus_path: str | None = None
    out_dir: str | None = None
    workers: int = 1
    seed: int = 20260810
    tol_scale: float = 1.0
    figures: bool = True
    quad_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(n < 1 for n in self.dimensions):
            raise ValueError("dimensions must be positive")
        bad = [s for s in self.suites if s != "all" and s not in SUITES]
        if bad:
            raise ValueError(f"unknown suite(s): {', '.join(bad)}")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def resolved_suites(self) -> tuple[str, ...]:
        if "all" in self.suites:
            return SUITES
        return tuple(s for s in SUITES if s in self.suites)

    def spec_for(self, n: int) -> QuadSpec:
        spec = QuadSpec.for_dimension(n)
        if self.quad_overrides:
            spec = replace(spec, **self.quad_overrides)
        if spec.seed != self.seed:
            spec = replace(spec, seed=self.seed)
        return spec

    @staticmethod
    def from_json(doc: dict) -> "HarnessConfig":
        kw = dict(doc)
        for key in ("dimensions", "suites"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return HarnessConfig(**kw)


# ---------------------------------------------------------------------------
# Tolerances (one table; everything else refers here)
# ---------------------------------------------------------------------------

TOLERANCES = {
    "identity": {1: 1e-6, 2: 1e-4, 3: 1e-2},
    "boundary-kernel": {1: 1e-5, 2: 1e-4, 3: 1e-2},
    "projection-numeric": {1: 1e-5, 2: 1e-4, 3: 1e-2},
    "appendix": {1: 1e-4, 2: 1e-4, 3: 1e-2},
    "volume-ratio": {1: 1e-3, 2: 1e-3, 3: 1e-2},
    "invariance": {1: 1e-4, 2: 1e-4, 3: 1e-2},
    "bump": {1: 1e-8, 2: 1e-8, 3: 1e-4},
    "symbolic": 1e-12,
    "constant-grid": 1e-14,
    "derivative-oracle": 1e-6,
    "slope": 1e-3,
    "roundtrip": 1e-12,
}


def _tol(config: HarnessConfig, kind: str, n: int | None = None) -> float:
    entry = TOLERANCES[kind]
    value = entry if isinstance(entry, float) else entry[min(n, 3)]
    return value * config.tol_scale


def _rng(config: HarnessConfig, check_id: str) -> np.random.Generator:
    return np.random.default_rng(config.seed ^ zlib.crc32(check_id.encode()))


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusEntry:
    entry_id: str
    fn: KernelFn
    annihilator: MultiIndex | None = None  # set for the polynomial members


def shifted_pole(n: int) -> SiegelPoint:
    zp = tuple(0.5 + 0.3j for _ in range(n - 1))
    return SiegelPoint(zp, 0.4 + 1j * (sum(abs(v) ** 2 for v in zp) + 0.8))


def counterexample_fn(n: int) -> KernelFn:
    """The vertical-only kernel power killed by every plain d/dz_j, j < n."""
    return pure_term(origin_i(n), n + 2.0, coeff=(2j) ** (-(n + 2.0)))


def corpus_default(n: int) -> list[CorpusEntry]:
    """Built-in deterministic corpus: pure powers, their images, polynomials."""
    entries: list[CorpusEntry] = []
    poles = {
        "pole-i": origin_i(n),
        "pole-2i": SiegelPoint((0j,) * (n - 1), 2j),
        "pole-shift": shifted_pole(n),
        "pole-dilated": dilate(origin_i(n), 2.0),
    }
    for s_off, s_tag in ((1.5, "s1.5"), (2.0, "s2"), (4.0, "s4")):
        entries.append(
            CorpusEntry(f"pole-i-{s_tag}", pure_term(poles["pole-i"], n + s_off))
        )
    for pid in ("pole-2i", "pole-shift", "pole-dilated"):
        entries.append(CorpusEntry(f"{pid}-s2", pure_term(poles[pid], n + 2.0)))
    entries.append(CorpusEntry("vanishing-partial", counterexample_fn(n)))
    # polynomial members, annihilated by vertical powers
    entries.append(
        CorpusEntry("constant", monomial(n, 0), annihilator=MultiIndex.vertical(n, 1))
    )
    entries.append(
        CorpusEntry("vertical-linear", monomial(n, 1),
                     annihilator=MultiIndex.vertical(n, 2))
    )
    entries.append(
        CorpusEntry("vertical-square", monomial(n, 2, coeff=0.5),
                     annihilator=MultiIndex.vertical(n, 3))
    )
    # closure under one application of each tangential operator
    for base_id in ("pole-i-s2", "pole-shift-s2"):
        base = next(e.fn for e in entries if e.entry_id == base_id)
        for j in range(1, n + 1):
            entries.append(CorpusEntry(f"L{j}({base_id})", apply_L(base, j)))
    return entries


def corpus_pure(entries) -> list[CorpusEntry]:
    return [e for e in entries if e.fn.is_single_pure_term]


def corpus_to_json(entries) -> dict:
    return {
        "entries": [
            {
                "id": e.entry_id,
                "fn": to_json(e.fn),
                "annihilator": (
                    None
                    if e.annihilator is None
                    else list(e.annihilator.alpha_prime) + [e.annihilator.alpha_n]
                ),
            }
            for e in entries
        ]
    }


def corpus_from_json(doc: dict, n: int) -> list[CorpusEntry]:
    entries = []
    for item in doc["entries"]:
        fn = from_json(item["fn"])
        if fn.n != n:
            continue
        ann = item.get("annihilator")
        entries.append(
            CorpusEntry(
                item["id"],
                fn,
                None if ann is None else MultiIndex(tuple(ann[:-1]), ann[-1]),
            )
        )
    return entries


def load_corpus(config: HarnessConfig, n: int) -> list[CorpusEntry]:
    if config.corpus_path is None:
        return corpus_default(n)
    with open(config.corpus_path) as fh:
        doc = json.load(fh)
    return corpus_from_json(doc, n)


# ---------------------------------------------------------------------------
# Check construction
# ---------------------------------------------------------------------------


@dataclass
class Check:
    check_id: str
    suite: str
    n: int
    run: object  # () -> CheckReport


def _sample_points(n: int, rng, count: int, scale: float = 1.0,
                   rho_range=(0.5, 2.0)):
    """Random interior points with moderate height, resolvable by the grids."""
    zp = 0.5 * scale * (
        rng.standard_normal((count, n - 1)) + 1j * rng.standard_normal((count, n - 1))
    )
    x = 0.6 * scale * rng.standard_normal(count)
    r = rng.uniform(*rho_range, count)
    out = []
    for i in range(count):
        prime = tuple(zp[i])
        out.append(
            SiegelPoint(prime, x[i] + 1j * (sum(abs(v) ** 2 for v in prime) + r[i]))
        )
    return out


def _moment_parameter_sets(n: int):
    """(s, t) pairs for the absolute-moment identity, all admissible."""
    pairs = [
        (n + 2.0, 0.0),
        (n + 3.0, 0.0),
        (n + 4.0, 1.0),
        (n + 2.5, 0.5),
        (n + 5.5, 2.5),
        (n + 1.6, -0.4) if n <= 2 else (n + 3.0, 1.0),
        (2 * n + 3.0, 1.5),
        (n + 3.5, 0.25),
        (n + 6.0, 3.0),
        (n + 2.2, 0.1),
    ]
    return pairs


def build_identity_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    tol = _tol(config, "identity", n)
    zs = [origin_i(n), _offset_point(n)]
    sets = _moment_parameter_sets(n)
    if n >= 3:
        sets = sets[:4]
        zs = zs[:1]
    idx = 0
    for s, t in sets:
        for z in zs:
            cid = f"kernel-moment[n={n}]-{idx:02d}"
            checks.append(
                Check(cid, "identities", n, _make_moment_check(cid, n, s, t, z, spec, tol))
            )
            idx += 1
            if n >= 3 and idx >= 4:
                break

    double_sets = [
        (n + 2.0, n + 2.0, 0.0),
        (n + 1.5, n + 3.0, 0.5),
        (n + 3.0, n + 2.5, 1.0),
    ]
    if n >= 3:
        double_sets = double_sets[:2]
    for i, (r, s, t) in enumerate(double_sets):
        cid = f"kernel-double[n={n}]-{i:02d}"
        z, u = origin_i(n), _offset_point(n)
        checks.append(
            Check(cid, "identities", n,
                  _make_double_check(cid, n, r, s, t, z, u, spec, tol))
        )

    tol_bk = _tol(config, "boundary-kernel", n)
    thetas = (0.5, 1.0, 2.0, 3.5)
    bk_zs = [origin_i(n), _offset_point(n)] + (
        _sample_points(n, _rng(config, f"boundary-kernel[n={n}]"), 3)
        if n <= 2
        else []
    )
    for i, theta in enumerate(thetas if n <= 2 else thetas[:2]):
        for j, z in enumerate(bk_zs):
            cid = f"boundary-kernel[n={n}]-{i}{j}"
            checks.append(
                Check(cid, "identities", n,
                      _make_boundary_kernel_check(cid, n, theta, z, spec, tol_bk))
            )

    for cid_base, maker in (
        ("pair-lower-bound", _make_pair_bound_check),
        ("tangential-gap", _make_gap_check),
        ("halfplane", _make_halfplane_check),
        ("cayley-roundtrip", _make_cayley_check),
        ("heisenberg-pairing", _make_heisenberg_check),
    ):
        cid = f"{cid_base}[n={n}]"
        checks.append(Check(cid, "identities", n, maker(cid, n, config)))

    if n <= 2:
        cid = f"shear-jacobian[n={n}]"
        checks.append(Check(cid, "identities", n,
                            _make_shear_bump_check(cid, n, config, spec)))
        cid = f"translate-jacobian[n={n}]"
        checks.append(Check(cid, "identities", n,
                            _make_translate_bump_check(cid, n, config, spec)))
    return checks


def _offset_point(n: int) -> SiegelPoint:
    zp = tuple(0.3 - 0.2j for _ in range(n - 1))
    return SiegelPoint(zp, 0.5 + 1j * (sum(abs(v) ** 2 for v in zp) + 2.0))


def _make_moment_check(cid, n, s, t, z, spec, tol):
    def run():
        z_arr = z.as_array()

        def g(W, rho_exact):
            return rho_exact**t * np.abs(rho_pair_arr(z_arr, W)) ** (-s)

        res = integrate_U(g, spec, n, center=z, scale=min(max(rho(z), 1e-2), 1e2))
        ref = kernel_moment_constant(n, s, t) * rho(z) ** (-(s - t - n - 1.0))
        return CheckReport.compare(
            cid, "identities", n, res.value.real, ref, tol,
            params={"s": s, "t": t, "z": list(z.as_array())},
            evaluations=res.evaluations,
            details={"converged": res.converged},
        )

    return run


def _make_double_check(cid, n, r, s, t, z, u, spec, tol):
    def run():
        z_arr, u_arr = z.as_array(), u.as_array()

        def g(W, rho_exact):
            return (
                rho_exact**t
                * rho_pair_arr(z_arr, W) ** (-r)
                * rho_pair_arr(W, u_arr) ** (-s)
            )

        res = integrate_U(g, spec, n, center=z)
        from .geometry import rho_pair

        ref = double_kernel_constant(n, r, s, t) * rho_pair(z, u) ** (
            -(r + s - t - n - 1.0)
        )
        return CheckReport.compare(
            cid, "identities", n, res.value, ref, tol,
            params={"r": r, "s": s, "t": t},
            evaluations=res.evaluations,
        )

    return run


def _make_boundary_kernel_check(cid, n, theta, z, spec, tol):
    def run():
        res, closed = bd.boundary_kernel_integral(z, theta, spec)
        return CheckReport.compare(
            cid, "identities", n, res.value.real, closed, tol,
            params={"theta": theta, "rho_z": rho(z)},
            evaluations=res.evaluations,
        )

    return run


def _make_pair_bound_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        Z = sample_domain_arr(rng, n, 100_000, 1.2)
        W = sample_domain_arr(rng, n, 100_000, 0.8)
        lhs = 2.0 * np.abs(rho_pair_arr(Z, W))
        rhs = np.maximum(rho_arr(Z), rho_arr(W))
        violations = int(np.sum(lhs < rhs))
        margin = float(np.min(lhs - rhs))
        return CheckReport.predicate(
            cid, "identities", n, passed=violations == 0,
            params={"samples": len(Z)}, computed=margin,
            details={"violations": violations},
        )

    return run


def _make_gap_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        Z = sample_domain_arr(rng, n, 100_000, 1.2)
        W = sample_domain_arr(rng, n, 100_000, 0.8)
        gap = np.sum(np.abs(Z[:, :-1] - W[:, :-1]) ** 2, axis=1)
        bound = 2.0 * np.abs(rho_pair_arr(Z, W))
        violations = int(np.sum(gap > bound))
        return CheckReport.predicate(
            cid, "identities", n, passed=violations == 0,
            params={"samples": len(Z)},
            computed=float(np.max(gap / bound)),
            details={"violations": violations},
        )

    return run


def _make_halfplane_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        Z = sample_closure_arr(rng, n, 100_000, 1.2)
        W = sample_closure_arr(rng, n, 100_000, 0.8)
        lhs = rho_pair_arr(Z, W).real
        rhs = 0.5 * (rho_arr(Z) + rho_arr(W))
        violations = int(np.sum(lhs < rhs - 1e-12))
        return CheckReport.predicate(
            cid, "identities", n, passed=violations == 0,
            params={"samples": len(Z)},
            computed=float(np.min(lhs - rhs)),
            details={"violations": violations},
        )

    return run


def _make_cayley_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        Z = sample_domain_arr(rng, n, 50_000, 1.0)
        # include near-boundary points
        Z[: len(Z) // 4, -1] = Z[: len(Z) // 4, -1].real + 1j * (
            np.sum(np.abs(Z[: len(Z) // 4, :-1]) ** 2, axis=1) + 1e-9
        )
        back = cayley_arr(cayley_inv_arr(Z))
        err = float(np.max(np.abs(back - Z)))
        tol = _tol(config, "roundtrip", n)
        return CheckReport.predicate(
            cid, "identities", n, passed=err < tol,
            params={"samples": len(Z)}, computed=err, tolerance=tol,
        )

    return run


def _make_heisenberg_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        U = sample_domain_arr(rng, n, 50_000, 1.0)
        V = sample_domain_arr(rng, n, 50_000, 1.3)
        z = SiegelPoint.from_array(sample_domain_arr(rng, n, 1, 1.0)[0])
        hu = heisenberg_translate_arr(z, U)
        hv = heisenberg_translate_arr(z, V)
        err = float(np.max(np.abs(rho_pair_arr(hu, hv) - rho_pair_arr(U, V))))
        tol = _tol(config, "roundtrip", n)
        return CheckReport.predicate(
            cid, "identities", n, passed=err < tol,
            params={"samples": len(U)}, computed=err, tolerance=tol,
        )

    return run


def _bump_integrand(center: np.ndarray, radius: float):
    def g(W, rho_exact):
        d2 = np.sum(np.abs(W - center) ** 2, axis=-1) / radius**2
        out = np.zeros(W.shape[0])
        inside = d2 < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - d2[inside]))
        return out

    return g


def _make_shear_bump_check(cid, n, config, spec):
    def run():
        center = _offset_point(n).as_array()
        g = _bump_integrand(center, 0.5)
        res_a = integrate_U(g, spec, n)
        spec_b = replace(
            spec, truncation=(("line", "rational"), ("ray", "exp"))
        )
        res_b = integrate_U(g, spec_b, n)
        tol = _tol(config, "bump", n)
        return CheckReport.compare(
            cid, "identities", n, res_a.value.real, res_b.value.real, tol,
            evaluations=res_a.evaluations + res_b.evaluations,
            details={"maps_a": dict(spec.truncation), "maps_b": dict(spec_b.truncation)},
        )

    return run


def _make_translate_bump_check(cid, n, config, spec):
    def run():
        rng = _rng(config, cid)
        center = _offset_point(n).as_array()
        g = _bump_integrand(center, 0.5)
        z = SiegelPoint.from_array(sample_domain_arr(rng, n, 1, 0.7)[0])

        def g_translated(W, rho_exact):
            return g(heisenberg_translate_arr(z, W), rho_exact)

        res_a = integrate_U(g, spec, n)
        res_b = integrate_U(g_translated, spec, n)
        tol = _tol(config, "bump", n)
        return CheckReport.compare(
            cid, "identities", n, res_b.value.real, res_a.value.real, tol,
            evaluations=res_a.evaluations + res_b.evaluations,
        )

    return run


# -- reproducing -------------------------------------------------------------


def build_reproducing_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    cid = f"reproducing-constant-grid[n={n}]"
    checks.append(Check(cid, "reproducing", n, _make_constant_grid_check(cid, n, config)))

    cid = f"projection-symbolic[n={n}]"
    checks.append(Check(cid, "reproducing", n, _make_projection_symbolic_check(cid, n, config)))

    lam_list = (0.0, 1.0) if n <= 2 else (0.0,)
    for i, lam in enumerate(lam_list):
        cid = f"projection-numeric[n={n}]-{i}"
        checks.append(
            Check(cid, "reproducing", n,
                  _make_projection_numeric_check(cid, n, lam, config, spec))
        )
    return checks


def _make_constant_grid_check(cid, n, config):
    def run():
        lams = (0.0, 0.5, 1.0, 2.5, 4.0)
        ss = (n + 1.2, n + 2.0, n + 3.0, n + 4.5, 2 * n + 3.0)
        worst = 0.0
        for lam in lams:
            for s in ss:
                log_const = ops.reproduction_log_constant(n, lam, s)
                worst = max(worst, abs(math.exp(log_const) - 1.0))
        tol = _tol(config, "constant-grid", n)
        return CheckReport.predicate(
            cid, "reproducing", n, passed=worst <= tol,
            params={"grid": len(lams) * len(ss)}, computed=worst, tolerance=tol,
        )

    return run


def _make_projection_symbolic_check(cid, n, config):
    def run():
        from .kernels import coefficient_distance

        f = counterexample_fn(n)
        g = ops.project(f, 0.0)
        dist = coefficient_distance(f, g)
        # linearity on a two-term sum
        f2 = pure_term(origin_i(n), n + 1.5, coeff=0.3j)
        lhs = ops.project(f + f2, 0.5)
        rhs = ops.project(f, 0.5) + ops.project(f2, 0.5)
        dist2 = coefficient_distance(lhs, rhs)
        tol = _tol(config, "symbolic", n)
        return CheckReport.predicate(
            cid, "reproducing", n,
            passed=dist <= tol and dist2 <= tol,
            computed=max(dist, dist2), tolerance=tol,
        )

    return run


def _make_projection_numeric_check(cid, n, lam, config, spec):
    def run():
        rng = _rng(config, cid)
        f = pure_term(origin_i(n), n + 2.0)
        pts = _sample_points(n, rng, 5 if n <= 2 else 1)
        tol = _tol(config, "projection-numeric", n)
        return ops.project_numeric_check(
            f, lam, pts, spec, tol, n, cid, "reproducing"
        )

    return run


# -- reconstruction ----------------------------------------------------------


def build_reconstruction_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    cid = f"derivative-oracle[n={n}]"
    checks.append(Check(cid, "reconstruction", n, _make_fd_oracle_check(cid, n, config)))

    cid = f"derivative-constant[n={n}]"
    checks.append(Check(cid, "reconstruction", n, _make_derivative_constant_check(cid, n, config)))

    if n >= 2:
        cid = f"commutator[n={n}]"
        checks.append(Check(cid, "reconstruction", n, _make_commutator_check(cid, n, config)))

    for N in range(4):
        for lam in (0.0, 1.0, 2.5):
            cid = f"reconstruct[n={n},N={N},lam={lam}]"
            checks.append(
                Check(cid, "reconstruction", n,
                      _make_reconstruct_check(cid, n, N, lam, config))
            )

    cid = f"reconstruct-numeric[n={n}]"
    checks.append(
        Check(cid, "reconstruction", n,
              _make_reconstruct_numeric_check(cid, n, config, spec))
    )

    if n == 1:
        cid = "fubini-majorant[n=1]"
        checks.append(Check(cid, "reconstruction", n, _make_fubini_check(cid, config, spec)))
    return checks


def _random_kernel_fn(rng, n) -> KernelFn:
    pole_arr = sample_domain_arr(rng, n, 1, 0.8)[0]
    pole = SiegelPoint.from_array(pole_arr)
    if rho(pole) < 0.5:
        pole = SiegelPoint(pole.zprime, pole.zn + 0.5j)
    gp = tuple(int(rng.integers(0, 3)) for _ in range(n - 1))
    k = int(rng.integers(0, 3))
    s = float(rng.uniform(0.5, 5.0))
    coeff = complex(rng.standard_normal(), rng.standard_normal())
    from .kernels import KernelTerm

    return KernelFn(n, [KernelTerm(coeff, gp, k, pole, s)])


def _make_fd_oracle_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        tol = _tol(config, "derivative-oracle", n)
        worst = 0.0
        trials = 1000
        for _ in range(trials):
            f = _random_kernel_fn(rng, n)
            z = SiegelPoint.from_array(sample_domain_arr(rng, n, 1, 0.8)[0])
            if rho(z) < 0.3:
                z = SiegelPoint(z.zprime, z.zn + 0.4j)
            j = int(rng.integers(1, n + 1))
            sym = evaluate(apply_L(f, j), z)
            fd = tangential_fd(lambda p: evaluate(f, p), z, j)
            scale = max(abs(fd), 1e-9)
            worst = max(worst, abs(sym - fd) / scale)
        return CheckReport.predicate(
            cid, "reconstruction", n, passed=worst < tol,
            params={"trials": trials}, computed=worst, tolerance=tol,
        )

    return run


def _make_derivative_constant_check(cid, n, config):
    def run():
        alphas = [MultiIndex.vertical(n, N) for N in (0, 1, 3)]
        if n >= 2:
            alphas += [
                MultiIndex((1,) + (0,) * (n - 2), 0),
                MultiIndex((2,) + (0,) * (n - 2), 1),
            ]
        worst = 0.0
        for lam in (0.0, 2.5):
            for alpha in alphas:
                sym = kernel_derivative_constant(n, lam, alpha)
                pred = (
                    (0.5j) ** alpha.alpha_n
                    * (-1.0) ** sum(alpha.alpha_prime)
                    * pochhammer(n + 1.0 + lam, alpha.order)
                )
                worst = max(worst, abs(sym - pred) / max(abs(pred), 1.0))
        tol = _tol(config, "symbolic", n)
        return CheckReport.predicate(
            cid, "reconstruction", n, passed=worst <= tol,
            computed=worst, tolerance=tol,
            details={"vertical_sign": "(+i/2)^N"},
        )

    return run


def _make_commutator_check(cid, n, config):
    def run():
        from .kernels import coefficient_distance

        f = pure_term(shifted_pole(n), n + 1.5) + monomial(n, 2, coeff=0.5j)
        worst = 0.0
        for j in range(1, n):
            for k in range(j + 1, n + 1):
                a = apply_L(apply_L(f, j), k)
                b = apply_L(apply_L(f, k), j)
                worst = max(worst, coefficient_distance(a, b))
        tol = _tol(config, "symbolic", n)
        return CheckReport.predicate(
            cid, "reconstruction", n, passed=worst <= tol,
            computed=worst, tolerance=tol,
        )

    return run


def _make_reconstruct_check(cid, n, N, lam, config):
    def run():
        f = pure_term(origin_i(n), n + 2.0) + pure_term(
            SiegelPoint((0j,) * (n - 1), 2j), n + 1.5, coeff=0.5 - 0.25j
        )
        residual = ops.reconstruction_residual(f, lam, N)
        tol = _tol(config, "symbolic", n)
        return CheckReport.predicate(
            cid, "reconstruction", n, passed=residual <= tol,
            params={"N": N, "lam": lam},
            computed=residual, tolerance=tol,
            details={"prefactor_convention": "(-2i)^N Gamma(1+lam)/Gamma(1+lam+N)"},
        )

    return run


def _make_reconstruct_numeric_check(cid, n, config, spec):
    def run():
        rng = _rng(config, cid)
        lam, N = 1.0, 1
        f = pure_term(origin_i(n), n + 2.0)
        h = apply_L_alpha(f, MultiIndex.vertical(n, N))
        pref = (-2j) ** N * math.exp(math.lgamma(1.0 + lam) - math.lgamma(1.0 + lam + N))
        pts = _sample_points(n, rng, 3 if n <= 2 else 1)
        worst = 0.0
        evals = 0
        for z in pts:
            z_arr = z.as_array()

            def g(W, rho_exact):
                return (
                    rho_exact ** (lam + N)
                    * h.eval_arr(W)
                    * rho_pair_arr(z_arr, W) ** (-(n + 1.0 + lam))
                )

            res = integrate_U(g, spec, n, center=z, scale=min(max(rho(z), 1e-2), 1e2))
            from .geometry import projection_constant

            val = pref * projection_constant(n, lam) * res.value
            worst = max(worst, abs(val - f(z)) / abs(f(z)))
            evals += res.evaluations
        tol = _tol(config, "projection-numeric", n)
        return CheckReport.predicate(
            cid, "reconstruction", n, passed=worst <= tol,
            params={"lam": lam, "N": N}, computed=worst, tolerance=tol,
            evaluations=evals,
        )

    return run


def _make_fubini_check(cid, config, spec):
    def run():
        f = pure_term(origin_i(1), 3.0)
        res = ops.fubini_majorant(f, 0.0, 1.0, 1, origin_i(1), spec)
        return CheckReport.predicate(
            cid, "reconstruction", 1, passed=res.ok,
            params={"lam": 0.0, "gamma": 1.0, "N": 1},
            computed=res.lhs, evaluations=res.evaluations,
            details={"majorant": res.majorant},
        )

    return run


# -- uniqueness ---------------------------------------------------------------


def build_uniqueness_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    for entry in corpus:
        if entry.annihilator is not None:
            cid = f"annihilation[n={n},{entry.entry_id}]"
            checks.append(
                Check(cid, "uniqueness", n,
                      _make_annihilation_check(cid, n, entry, config))
            )
    pure = corpus_pure(corpus)
    if pure:
        cid = f"not-annihilated[n={n}]"
        checks.append(Check(cid, "uniqueness", n,
                            _make_not_annihilated_check(cid, n, pure)))
    cid = f"partial-vs-tangential[n={n}]"
    checks.append(Check(cid, "uniqueness", n,
                        _make_counterexample_check(cid, n, config)))
    for i, (a, absq) in enumerate(((0.0, 0.0), (0.5, 0.0), (1.0, 0.5), (1.7, 0.0))):
        cid = f"divergence-slope[n={n}]-{i}"
        checks.append(Check(cid, "uniqueness", n,
                            _make_slope_check(cid, n, a, absq, config)))
    return checks


def _make_annihilation_check(cid, n, entry, config):
    def run():
        p, t = 2.0, 0.0
        verdict = ops.uniqueness_check(entry.fn, entry.annihilator, p, t)
        ok = verdict.status == ops.VERDICT_CONTRADICTION and verdict.membership == "divergent"
        deg = max(term.k for term in entry.fn.terms)
        fit = ops.divergence_profile(
            deg * p + t, 0.0, [2.0**k for k in range(1, 11)], 1.0,
            slope_tol=_tol(config, "slope", n),
        )
        return CheckReport.predicate(
            cid, "uniqueness", n, passed=ok and fit.ok,
            params={"alpha": list(entry.annihilator.alpha_prime) + [entry.annihilator.alpha_n]},
            computed=fit.slope,
            tolerance=_tol(config, "slope", n),
            details={
                "verdict": verdict.status,
                "membership": verdict.membership,
                "expected_slope": fit.expected_slope,
            },
        )

    return run


def _make_not_annihilated_check(cid, n, pure_entries):
    def run():
        bad = []
        for entry in pure_entries:
            for alpha in (MultiIndex.vertical(n, 1), MultiIndex.vertical(n, 3)):
                verdict = ops.uniqueness_check(entry.fn, alpha)
                if verdict.status != ops.VERDICT_NOT_ANNIHILATED:
                    bad.append(entry.entry_id)
        return CheckReport.predicate(
            cid, "uniqueness", n, passed=not bad,
            params={"entries": len(pure_entries)},
            details={"failures": bad},
        )

    return run


def _make_counterexample_check(cid, n, config):
    def run():
        f = counterexample_fn(n)
        details = {}
        ok = True
        if n >= 2:
            partial = wirtinger_d(f, 1)
            details["partial_1_vanishes"] = partial.is_zero
            tangential = apply_L(f, 1)
            details["L_1_vanishes"] = tangential.is_zero
            ok = partial.is_zero and not tangential.is_zero
        norms = {}
        for p in (1.0, 2.0, 4.0):
            norms[f"p={p}"] = closed_norm(f, p, 0.0)
        details["norms"] = norms
        ok = ok and all(math.isfinite(v) for v in norms.values())
        return CheckReport.predicate(cid, "uniqueness", n, passed=ok, details=details)

    return run


def _make_slope_check(cid, n, a, absq, config):
    def run():
        tol = _tol(config, "slope", n)
        fit = ops.divergence_profile(
            a, absq, [2.0**k for k in range(1, 11)], 1.0, slope_tol=tol
        )
        return CheckReport.compare(
            cid, "uniqueness", n, fit.slope, fit.expected_slope, tol,
            params={"a": a, "base": absq},
        )

    return run


# -- equivalence ---------------------------------------------------------------


def build_equivalence_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    fids = ["pole-i-s2"] if n >= 3 else ["pole-i-s2", "pole-shift-s2"]
    pts = [(2.0, 0.0), (2.0, 1.0)] if n <= 2 else [(2.0, 0.0)]
    Ns = {1: (0, 1, 2), 2: (0, 1)}.get(n, (0, 1))
    entries = {e.entry_id: e for e in corpus}
    for fid in fids:
        if fid not in entries:
            continue
        for p, t in pts:
            for N in Ns:
                cid = f"norm-equivalence[n={n},p={p},t={t},N={N},{fid}]"
                checks.append(
                    Check(cid, "equivalence", n,
                          _make_equivalence_check(cid, n, entries[fid].fn, p, t, N,
                                                  config, spec))
                )
    alpha_list = [MultiIndex.vertical(n, 1)]
    if n >= 2:
        alpha_list.append(MultiIndex((1,) + (0,) * (n - 2), 0))
    for i, alpha in enumerate(alpha_list):
        cid = f"derivative-map[n={n}]-{i}"
        checks.append(
            Check(cid, "equivalence", n,
                  _make_derivative_map_check(cid, n, alpha, entries, config, spec))
        )
    if n == 2:
        cid = f"t-domination[n={n}]"
        checks.append(Check(cid, "equivalence", n,
                            _make_t_domination_check(cid, n, config, spec)))
    return checks


def _make_equivalence_check(cid, n, f, p, t, N, config, spec):
    def run():
        translation = SiegelPoint.from_array(
            sample_domain_arr(_rng(config, cid), n, 1, 0.6)[0]
        )
        rep = ops.norm_equivalence_report(
            f, p, t, N, spec, function_id=cid, translation=translation
        )
        tol = _tol(config, "invariance", n)
        inv_ok = all(
            dev <= tol for group in rep.invariance.values() for dev in group.values()
        )
        exact_ok = True
        if N == 0:
            exact_ok = all(r == 1.0 for r in rep.ratios.values())
        return CheckReport.predicate(
            cid, "equivalence", n,
            passed=rep.all_finite() and inv_ok and exact_ok,
            params={"p": p, "t": t, "N": N},
            computed=rep.ratios["vertical_over_f"],
            tolerance=tol,
            details=rep.to_json_dict(),
        )

    return run


def _make_derivative_map_check(cid, n, alpha, entries, config, spec):
    def run():
        f = entries["pole-i-s2"].fn
        rep = ops.derivative_map_report(f, alpha, 2.0, 0.0, spec,
                                        check_id=cid, function_id="pole-i-s2")
        # ratio invariance under translation
        u = SiegelPoint.from_array(sample_domain_arr(_rng(config, cid), n, 1, 0.5)[0])
        nf = ops.best_norm(f, 2.0, 0.0, spec, translation=u)
        ng = ops.weighted_derivative_norm(f, alpha, 2.0, 0.0, spec, translation=u)
        ratio_translated = ng.value / nf.value
        tol = _tol(config, "invariance", n)
        deviation = abs(ratio_translated / rep.computed - 1.0)
        rep.passed = bool(rep.passed and deviation <= tol)
        rep.details["translated_ratio_deviation"] = deviation
        rep.tolerance = tol
        return rep

    return run


def _make_t_domination_check(cid, n, config, spec):
    def run():
        rng = _rng(config, cid)
        fn = pure_term(origin_i(n), n + 2.0)
        weight = lambda W: np.abs(fn.eval_arr(W))
        alpha_prime = (1,) + (0,) * (n - 2)
        results = []
        ok = True
        for _ in range(2):
            z = SiegelPoint.from_array(sample_domain_arr(rng, n, 1, 0.7)[0])
            lhs, rhs, good = ops.t_domination_check(0.5, 0.5, alpha_prime, weight, z, spec)
            results.append({"lhs": lhs, "rhs": rhs})
            ok = ok and good
        regime = ops.t_operator_bounded_regime(0.5, 0.5, 2.0, 0.5)
        return CheckReport.predicate(
            cid, "equivalence", n, passed=ok,
            computed=results[-1]["lhs"] / results[-1]["rhs"],
            details={"points": results, "bounded_regime": regime},
        )

    return run


# -- appendix -------------------------------------------------------------------


def build_appendix_checks(config, n, corpus, spec) -> list[Check]:
    checks = []
    tol = _tol(config, "appendix", n)
    for i, z in enumerate([origin_i(n), _offset_point(n)][: 1 if n >= 3 else 2]):
        cid = f"poisson-mass[n={n}]-{i}"
        checks.append(Check(cid, "appendix", n,
                            _make_poisson_mass_check(cid, n, z, spec, tol)))
    hardy_entries = [e for e in corpus_pure(corpus) if e.fn.terms[0].s * 2.0 > n]
    for entry in hardy_entries[:2] if n <= 2 else hardy_entries[:1]:
        cid = f"poisson-reproduce[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_poisson_reproduce_check(cid, n, entry.fn, config, spec, tol)))
        cid = f"pointwise-bound[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_pointwise_check(cid, n, entry.fn, config, spec)))
        cid = f"hardy-sweep[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_hardy_sweep_check(cid, n, entry.fn, spec, tol)))
    if n <= 2:
        anchor = pure_term(origin_i(n), float(n))
        cid = f"lift-isometry[n={n}]-anchor"
        checks.append(Check(cid, "appendix", n,
                            _make_lift_check(cid, n, anchor, 2.0, spec, tol)))
        for entry in hardy_entries[:2]:
            cid = f"lift-isometry[n={n},{entry.entry_id}]"
            checks.append(Check(cid, "appendix", n,
                                _make_lift_check(cid, n, entry.fn, 2.0, spec, tol)))
    vol_tol = _tol(config, "volume-ratio", n)
    vol_entries = [e for e in corpus_pure(corpus) if e.fn.terms[0].s * 2.0 > n + 1.0]
    for entry in vol_entries[: 1 if n >= 3 else 2]:
        cid = f"volume-ratio[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_volume_check(cid, n, entry.fn, spec, vol_tol)))
    cid = f"mollifier-bound[n={n}]"
    checks.append(Check(cid, "appendix", n, _make_mollifier_bound_check(cid, n, config)))
    cid = f"mollifier-limit[n={n}]"
    checks.append(Check(cid, "appendix", n, _make_mollifier_limit_check(cid, n)))
    for entry in hardy_entries[:1]:
        cid = f"mollifier-decay[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_mollifier_decay_check(cid, n, entry.fn, config, spec)))
    for entry in hardy_entries[:2]:
        cid = f"hardy-embedding[n={n},{entry.entry_id}]"
        checks.append(Check(cid, "appendix", n,
                            _make_embedding_check(cid, n, entry.fn, spec)))
    return checks


def _make_poisson_mass_check(cid, n, z, spec, tol):
    def run():
        res = bd.poisson_integral(bd.BoundaryFn.constant(n), z, spec)
        return CheckReport.compare(
            cid, "appendix", n, res.value.real, 1.0, tol,
            params={"rho_z": rho(z)}, evaluations=res.evaluations,
        )

    return run


def _make_poisson_reproduce_check(cid, n, f, config, spec, tol):
    def run():
        rng = _rng(config, cid)
        worst = 0.0
        evals = 0
        for z in _sample_points(n, rng, 2):
            res = bd.poisson_integral(bd.BoundaryFn.trace(f), z, spec)
            worst = max(worst, abs(res.value - f(z)) / abs(f(z)))
            evals += res.evaluations
        return CheckReport.predicate(
            cid, "appendix", n, passed=worst <= tol,
            computed=worst, tolerance=tol, evaluations=evals,
        )

    return run


def _make_pointwise_check(cid, n, f, config, spec):
    def run():
        rng = _rng(config, cid)
        grid = [origin_i(n)] + _sample_points(n, rng, 30)
        return bd.pointwise_bound_report(f, 2.0, grid, spec, check_id=cid)

    return run


def _make_hardy_sweep_check(cid, n, f, spec, tol):
    def run():
        from .kernels import hardy_closed_norm
        from .quadrature import hardy_norm_quad

        est = hardy_norm_quad(f, 2.0, spec, n)
        ref = hardy_closed_norm(f, 2.0)
        rel = abs(est.value - ref) / ref
        return CheckReport.predicate(
            cid, "appendix", n,
            passed=rel <= tol and est.details["monotone"],
            computed=est.value, tolerance=tol,
            evaluations=est.evaluations,
            details={"closed": ref, "rel_error": rel,
                     "monotone": est.details["monotone"]},
        )

    return run


def _make_lift_check(cid, n, f, p, spec, tol):
    def run():
        return bd.lift_isometry_check(f, p, spec, tolerance=tol, check_id=cid)

    return run


def _make_volume_check(cid, n, f, spec, tol):
    def run():
        return bd.volume_change_check(f, 2.0, spec, tolerance=tol, check_id=cid)

    return run


def _make_mollifier_bound_check(cid, n, config):
    def run():
        rng = _rng(config, cid)
        Z = sample_closure_arr(rng, n, 100_000, 1.5)
        worst = 0.0
        for k in (3, 10):
            for N in (2, 5):
                vals = np.abs(bd.mollifier_arr(bd.MollifierParams(k, N), Z))
                worst = max(worst, float(np.max(vals)))
        return CheckReport.predicate(
            cid, "appendix", n, passed=worst <= 1.0 + 1e-12,
            params={"samples": len(Z)}, computed=worst, tolerance=1.0,
        )

    return run


def _make_mollifier_limit_check(cid, n):
    def run():
        z = origin_i(n)
        gaps = [
            abs(bd.mollifier(bd.MollifierParams(k, 2), z) - 1.0)
            for k in (10, 100, 10_000)
        ]
        ok = gaps[-1] < 1e-3 and gaps[0] >= gaps[1] >= gaps[2]
        return CheckReport.predicate(
            cid, "appendix", n, passed=ok, computed=gaps[-1], tolerance=1e-3,
            details={"gaps": gaps},
        )

    return run


def _make_mollifier_decay_check(cid, n, f, config, spec):
    def run():
        rng = _rng(config, cid)
        Z = sample_closure_arr(rng, n, 3000, 2.0)
        worst = 0.0
        ok = True
        for k in (2, 5, 20):
            rep = bd.mollifier_decay_check(
                f, 2.0, bd.MollifierParams(k, 2), Z, spec, check_id=cid
            )
            ok = ok and rep.passed
            worst = max(worst, rep.computed)
        return CheckReport.predicate(
            cid, "appendix", n, passed=ok, computed=worst, tolerance=1.0,
            params={"grid": int(Z.shape[0])},
        )

    return run


def _make_embedding_check(cid, n, f, spec):
    def run():
        return bd.hardy_embedding_check(f, 2.0, spec, check_id=cid)

    return run


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

_BUILDERS = {
    "identities": build_identity_checks,
    "reproducing": build_reproducing_checks,
    "reconstruction": build_reconstruction_checks,
    "uniqueness": build_uniqueness_checks,
    "equivalence": build_equivalence_checks,
    "appendix": build_appendix_checks,
}


def build_checks(config: HarnessConfig) -> list[Check]:
    checks: dict[str, Check] = {}
    for n in config.dimensions:
        corpus = load_corpus(config, n)
        spec = config.spec_for(n)
        for suite in config.resolved_suites():
            for check in _BUILDERS[suite](config, n, corpus, spec):
                checks.setdefault(check.check_id, check)
    return [checks[k] for k in sorted(checks)]


def _run_one(check: Check) -> CheckReport:
    start = time.perf_counter()
    try:
        report = check.run()
    except Exception as exc:  # a crashed check is a failed check, not a crash
        report = CheckReport(
            check_id=check.check_id, suite=check.suite, n=check.n,
            passed=False, details={"error": f"{type(exc).__name__}: {exc}"},
        )
    report.wall_time_ms = (time.perf_counter() - start) * 1e3
    return report


def run_suite(config: HarnessConfig) -> tuple[int, list[CheckReport]]:
    """Execute the configured checks; returns (exit_code, sorted reports)."""
    checks = build_checks(config)
    if not checks:
        raise ValueError("selection produced no checks")
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(_run_one, checks))
    else:
        reports = [_run_one(c) for c in checks]
    reports.sort(key=lambda r: r.check_id)
    failed = [r for r in reports if not r.passed and not r.skipped]
    return (1 if failed else 0), reports


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


def summary_csv(reports) -> str:
    lines = ["check_id,suite,n,computed,reference,rel_error,tolerance,passed,evaluations"]
    for r in reports:
        comp = r.computed
        if isinstance(comp, complex):
            comp = abs(comp)
        ref = r.reference
        if isinstance(ref, complex):
            ref = abs(ref)
        lines.append(
            ",".join(
                str(v) if v is not None else ""
                for v in (
                    r.check_id, r.suite, r.n, comp, ref,
                    r.rel_error, r.tolerance, r.passed, r.evaluations,
                )
            )
        )
    return "\n".join(lines) + "\n"


def summary_table(reports) -> str:
    width = max(len(r.check_id) for r in reports)
    out = []
    last_suite = None
    for r in reports:
        if r.suite != last_suite:
            out.append(f"-- suite: {r.suite} " + "-" * max(0, width - len(r.suite)))
            last_suite = r.suite
        status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
        err = f"rel={r.rel_error:.2e}" if r.rel_error is not None else ""
        tol = f"tol={r.tolerance:.0e}" if r.tolerance else ""
        out.append(f"{status}  {r.check_id:<{width}}  {err:<14} {tol}")
    passed = sum(1 for r in reports if r.passed)
    skipped = sum(1 for r in reports if r.skipped)
    out.append(
        f"== {passed}/{len(reports)} passed"
        + (f", {skipped} skipped" if skipped else "")
    )
    return "\n".join(out)


def emit_summary(reports, out_dir, figures: bool = True, include_timing: bool = True):
    """Write JSON-lines, CSV and (optionally) the report figures."""
    import os

    if not reports:
        raise ValueError("no reports to summarize")
    os.makedirs(out_dir, exist_ok=True)
    write_jsonl(reports, os.path.join(out_dir, "report.jsonl"), include_timing)
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        fh.write(summary_csv(reports))
    written = [
        os.path.join(out_dir, "report.jsonl"),
        os.path.join(out_dir, "summary.csv"),
    ]
    if figures:
        from .figures import render_report_figures

        written += render_report_figures(reports, os.path.join(out_dir, "figures"))
    return written
