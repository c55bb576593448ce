"""Check reports: the JSON-lines record of one verified identity."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):  # numpy scalars
        return _jsonable(v.item())
    return v


@dataclass
class CheckReport:
    """One verified identity: computed vs reference, errors, verdict, cost.

    ``passed`` is ``rel_error <= tolerance`` unless the check installs its own
    predicate (property-style checks set ``passed`` directly).  Reports are
    append-only JSON-lines; ``wall_time_ms`` is the only field allowed to vary
    between otherwise identical runs.
    """

    check_id: str
    suite: str
    n: int
    params: dict = field(default_factory=dict)
    computed: object = None
    reference: object = None
    abs_error: float | None = None
    rel_error: float | None = None
    tolerance: float | None = None
    passed: bool = False
    skipped: bool = False
    skip_reason: str = ""
    evaluations: int = 0
    wall_time_ms: float = 0.0
    details: dict = field(default_factory=dict)

    @staticmethod
    def compare(
        check_id: str,
        suite: str,
        n: int,
        computed,
        reference,
        tolerance: float,
        params: dict | None = None,
        evaluations: int = 0,
        details: dict | None = None,
    ) -> "CheckReport":
        """Standard comparison report: pass iff relative error is in tolerance."""
        comp = complex(computed)
        ref = complex(reference)
        abs_err = abs(comp - ref)
        scale = abs(ref)
        rel_err = abs_err / scale if scale > 0 else abs_err
        return CheckReport(
            check_id=check_id,
            suite=suite,
            n=n,
            params=params or {},
            computed=comp if comp.imag else comp.real,
            reference=ref if ref.imag else ref.real,
            abs_error=abs_err,
            rel_error=rel_err,
            tolerance=tolerance,
            passed=bool(rel_err <= tolerance),
            evaluations=evaluations,
            details=details or {},
        )

    @staticmethod
    def predicate(
        check_id: str,
        suite: str,
        n: int,
        passed: bool,
        params: dict | None = None,
        computed=None,
        tolerance: float | None = None,
        evaluations: int = 0,
        details: dict | None = None,
    ) -> "CheckReport":
        """Property-style report whose verdict is a custom predicate."""
        return CheckReport(
            check_id=check_id,
            suite=suite,
            n=n,
            params=params or {},
            computed=computed,
            tolerance=tolerance,
            passed=bool(passed),
            evaluations=evaluations,
            details=details or {},
        )

    def to_json_dict(self, include_timing: bool = True) -> dict:
        doc = {
            "check_id": self.check_id,
            "suite": self.suite,
            "n": self.n,
            "params": _jsonable(self.params),
            "computed": _jsonable(self.computed),
            "reference": _jsonable(self.reference),
            "abs_error": _jsonable(self.abs_error),
            "rel_error": _jsonable(self.rel_error),
            "tolerance": _jsonable(self.tolerance),
            "passed": self.passed,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "evaluations": int(self.evaluations),
            "details": _jsonable(self.details),
        }
        if include_timing:
            doc["wall_time_ms"] = round(self.wall_time_ms, 3)
        return doc

    def to_json_line(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_json_dict(include_timing), sort_keys=True)


def write_jsonl(reports, path, include_timing: bool = True):
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(rep.to_json_line(include_timing) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass
class EquivalenceReport:
    """The three norms of the derivative-norm equivalence and their ratios."""

    function_id: str
    n: int
    p: float
    t: float
    N: int
    norm_f: float
    norm_vertical: float  # || rho^N L_n^N f ||
    norm_sum: float  # sum over |alpha| = N of || rho^<alpha> L^alpha f ||
    ratios: dict = field(default_factory=dict)
    invariance: dict = field(default_factory=dict)

    def all_finite(self) -> bool:
        return all(
            math.isfinite(v) and v > 0
            for v in (self.norm_f, self.norm_vertical, self.norm_sum)
        )

    def to_json_dict(self) -> dict:
        return {
            "function_id": self.function_id,
            "n": self.n,
            "p": self.p,
            "t": self.t,
            "N": self.N,
            "norm_f": _jsonable(self.norm_f),
            "norm_vertical": _jsonable(self.norm_vertical),
            "norm_sum": _jsonable(self.norm_sum),
            "ratios": _jsonable(self.ratios),
            "invariance": _jsonable(self.invariance),
        }
