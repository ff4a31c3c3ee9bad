"""Seeded property-verification suites.

Every suite draws its trials from ``numpy.random.default_rng([seed, trial])`` so
trials are independent of each other and of execution order; identical
arguments give identical reports.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cmspace as cm
from .matpair import (
    DomainError,
    PhasePoint,
    TangentPair,
    TraceExpr,
    commutator,
    eval_trace_expr,
    grad_trace_expr,
    pairing,
    random_phase_point,
)
from .pencil import (
    P0,
    P1,
    bracket_numeric,
    hamiltonian_expr,
    hierarchy_differential,
    jacobi_defect,
    necklace_bracket,
    nijenhuis_torsion_numeric,
    p0_apply,
    p1_apply,
    pencil,
    recursion_transpose_apply,
)
from .reduction import (
    SectionPoint,
    canonical_form,
    random_conjugator,
    random_section_point,
    tangent_decompose,
)
from .matpair import conjugate

__all__ = ["SUITES", "DEFAULT_TOLERANCES", "VerifyReport", "verify", "random_trace_expr", "swap_substitute"]

# sampling in M is capped per trial so a degenerate request fails instead of hanging
MAX_RESAMPLES = 10_000
SAMPLE_TOL = 1e-3


@dataclass
class VerifyReport:
    suite: str
    n: int
    trials: int
    seed: int
    tol: float
    defects: list[float] = field(default_factory=list)
    error: str | None = None

    @property
    def max_defect(self) -> float:
        return max(self.defects) if self.defects else float("nan")

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.defects) and self.max_defect < self.tol

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "max_defect": self.max_defect if self.defects else None,
            "passed": self.passed,
            "error": self.error,
            "defects": self.defects,
        }


def random_word(rng: np.random.Generator, max_len: int) -> str:
    length = int(rng.integers(1, max_len + 1))
    return "".join(rng.choice(["A", "B"], size=length))


def random_trace_expr(rng: np.random.Generator, max_len: int = 5, max_terms: int = 1) -> TraceExpr:
    terms = int(rng.integers(1, max_terms + 1))
    return TraceExpr.from_pairs((random_word(rng, max_len), float(rng.uniform(-1, 1)) if terms > 1 else 1.0)
                                for _ in range(terms))


def swap_substitute(f: TraceExpr) -> TraceExpr:
    """``f o sigma`` for ``sigma(A, B) = (-B, A)``: substitute ``A -> -B`` and ``B -> A``."""
    table = str.maketrans("AB", "BA")
    return TraceExpr.from_pairs((w.translate(table), c * (-1) ** w.count("A")) for w, c in f.terms.items())


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(b))


def _random_point(n, rng):
    return random_phase_point(n, rng, tol=SAMPLE_TOL, max_tries=MAX_RESAMPLES)


def _raw_point(n, rng):
    return PhasePoint(rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, n)))


def _random_tangent(n, rng):
    return TangentPair(rng.normal(size=(n, n)), rng.normal(size=(n, n)))


# ---------------------------------------------------------------------------
# suites: each maps (n, rng) to the largest defect of one trial


def _suite_gradients(n, rng):
    p = _raw_point(n, rng)
    f = random_trace_expr(rng, 5, 3)
    grad = grad_trace_expr(f, p)
    h = 1e-5 * (1.0 + p.norm())
    worst = 0.0
    for _ in range(20):
        v = _random_tangent(n, rng)
        fd = (eval_trace_expr(f, PhasePoint(p.A + h * v.V, p.B + h * v.W))
              - eval_trace_expr(f, PhasePoint(p.A - h * v.V, p.B - h * v.W))) / (2 * h)
        worst = max(worst, _rel(fd, pairing(grad, v)))
    return worst


def _jacobi_trial(selectors):
    def trial(n, rng):
        p = _raw_point(n, rng)
        f, g, h = (random_trace_expr(rng, 4) for _ in range(3))
        return max(abs(jacobi_defect(s, f, g, h, p)) for s in selectors)
    return trial


def _suite_ladder(n, rng):
    p = _raw_point(n, rng)
    worst = 0.0
    for k in range(1, 2 * n + 1):
        dk, dk1 = hierarchy_differential(k, p), hierarchy_differential(k + 1, p)
        scale = 1.0 + dk1.norm()
        worst = max(worst, (recursion_transpose_apply(p, dk) - dk1).norm() / scale)
        worst = max(worst, (p1_apply(p, dk) - p0_apply(dk1)).norm() / scale)
    return worst


def _suite_involutivity(n, rng):
    p = _raw_point(n, rng)
    worst = 0.0
    for k in range(1, 2 * n + 1):
        for l in range(1, 2 * n + 1):
            for s in (P0, P1):
                worst = max(worst, abs(bracket_numeric(s, hamiltonian_expr(k), hamiltonian_expr(l), p)))
    return worst


def _suite_torsion(n, rng):
    p = _raw_point(n, rng)
    T = nijenhuis_torsion_numeric(p, _random_tangent(n, rng), _random_tangent(n, rng))
    return max(np.max(np.abs(T.V)), np.max(np.abs(T.W))) / (1.0 + p.norm() ** 2)


def _suite_reduction_roundtrip(n, rng):
    q = random_section_point(n, rng, max_tries=MAX_RESAMPLES)
    g = random_conjugator(n, rng)
    sp_, g_found = canonical_form(conjugate(g, q.point))
    if sp_.pattern != q.pattern:
        return np.inf
    back = conjugate(g_found, conjugate(g, q.point))
    return max(np.max(np.abs(sp_.A - q.A)), np.max(np.abs(sp_.B - q.B)),
               np.max(np.abs(back.A - q.A)), np.max(np.abs(back.B - q.B)))


def _suite_decomposition(n, rng):
    sp_ = random_section_point(n, rng, max_tries=MAX_RESAMPLES)
    t = _random_tangent(n, rng)
    dec = tangent_decompose(sp_, t)
    residual = (t - dec.section_tangent - dec.orbit_part(sp_)).norm() / (1.0 + t.norm())
    again = tangent_decompose(sp_, dec.section_tangent)
    return max(residual, float(np.max(np.abs(again.generator))))


def _labels(n):
    return [("I", k) for k in range(1, n + 1)] + [("J", k) for k in range(1, n + 1)]


def _expr(which, k):
    return cm.I_expr(k) if which == "I" else cm.J_expr(k)


def _suite_subalgebra(n, rng):
    p = _random_point(n, rng)
    v = cm.invariants_map(p)
    worst = 0.0
    for s in (P0, P1):
        for a, k in _labels(n):
            for b, l in _labels(n):
                closed = cm.evaluate_bracket_IJ(s, a, k, b, l, v)
                lifted = eval_trace_expr(necklace_bracket(s, _expr(a, k), _expr(b, l)), p)
                worst = max(worst, _rel(lifted, closed))
    return worst


def _suite_tangency(n, rng):
    c = cm.random_cm_state(n, rng, tol=SAMPLE_TOL, max_tries=MAX_RESAMPLES)
    p = cm.embed_Q(c)
    sp_ = SectionPoint.from_point(p)
    worst = 0.0
    for k in range(1, n + 1):
        Ak = np.linalg.matrix_power(p.A, k - 1)
        dec = tangent_decompose(sp_, TangentPair(np.zeros((n, n)), Ak))
        diff = dec.generator - cm.xi_closed_form(c, k)
        diff -= np.trace(diff) / n * np.eye(n)
        worst = max(worst, float(np.max(np.abs(diff))) / (1.0 + np.max(np.abs(Ak))))
        flow = dec.section_tangent
        q_defect = commutator(flow.W, p.A) + commutator(p.B, flow.V)
        worst = max(worst, float(np.max(np.abs(q_defect))) / (1.0 + np.max(np.abs(Ak))))
    return worst


def _n2_state(rng):
    for _ in range(MAX_RESAMPLES):
        c = cm.random_cm_state(2, rng, tol=SAMPLE_TOL, max_tries=MAX_RESAMPLES)
        if abs(cm.n2_discriminant(c)) > 0.1:
            return c
    raise DomainError("no two-particle state with |Delta| > 0.1")


def _suite_n2_oracle(n, rng):
    c = _n2_state(rng)
    transported = cm.transported_xy_brackets(P1, c)
    closed = cm.n2_bracket1_matrix(c)
    canonical = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    first = cm.transported_xy_brackets(P0, c)
    return max(float(np.max(np.abs(transported - closed) / (1.0 + np.abs(closed)))),
               float(np.max(np.abs(first - canonical))))


def _suite_pi_roundtrip(n, rng):
    for _ in range(MAX_RESAMPLES):
        lam = np.sort(rng.uniform(-2, 2, n))
        if n == 1 or np.min(np.diff(lam)) > 0.3:
            break
    else:
        raise DomainError("could not sample separated eigenvalues")
    q = cm.QPrimeData(lam, rng.uniform(-2, 2, n))
    back = cm.pi_inverse(cm.invariants_map(cm.embed_Q_prime(q)))
    return max(float(np.max(np.abs(back.lam - q.lam))), float(np.max(np.abs(back.mu - q.mu))))


def _suite_duality(n, rng):
    p = _raw_point(n, rng)
    sp_ = cm.duality_swap(p)
    worst = 0.0
    for _ in range(5):
        f, g = random_trace_expr(rng, 4), random_trace_expr(rng, 4)
        fs, gs = swap_substitute(f), swap_substitute(g)
        for s in (P0, P1):
            worst = max(worst, _rel(bracket_numeric(s, fs, gs, p), cm.exchanged_bracket(s, f, g, sp_)))
    return worst


SUITES: dict[str, Callable] = {
    "gradients": _suite_gradients,
    "jacobi": _jacobi_trial((P0, P1)),
    "compatibility": _jacobi_trial((pencil(-1.0), pencil(0.5), pencil(2.0))),
    "ladder": _suite_ladder,
    "involutivity": _suite_involutivity,
    "torsion": _suite_torsion,
    "reduction-roundtrip": _suite_reduction_roundtrip,
    "decomposition": _suite_decomposition,
    "subalgebra": _suite_subalgebra,
    "tangency": _suite_tangency,
    "n2-oracle": _suite_n2_oracle,
    "pi-roundtrip": _suite_pi_roundtrip,
    "duality": _suite_duality,
}

DEFAULT_TOLERANCES = {
    "gradients": 1e-6,
    "jacobi": 1e-8,
    "compatibility": 1e-8,
    "ladder": 1e-12,
    "involutivity": 1e-10,
    "torsion": 1e-6,
    "reduction-roundtrip": 1e-8,
    "decomposition": 1e-10,
    "subalgebra": 1e-9,
    "tangency": 1e-9,
    "n2-oracle": 1e-9,
    "pi-roundtrip": 1e-8,
    "duality": 1e-10,
}


def verify(suite: str, n: int, trials: int, seed: int, tol: float | None = None,
           workers: int = 1) -> VerifyReport:
    """Run ``trials`` seeded trials of a named suite and collect per-trial defects."""
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if suite == "n2-oracle":
        n = 2
    min_n = 1 if suite in ("gradients", "pi-roundtrip") else 2
    if n < min_n:
        raise ValueError(f"suite {suite} needs n >= {min_n}")
    tol = DEFAULT_TOLERANCES[suite] if tol is None else float(tol)
    fn = SUITES[suite]
    report = VerifyReport(suite, n, trials, seed, tol)

    def run(i):
        return float(fn(n, np.random.default_rng([seed, i])))

    try:
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                report.defects = list(pool.map(run, range(trials)))
        else:
            report.defects = [run(i) for i in range(trials)]
    except DomainError as exc:
        report.defects = []
        report.error = str(exc)
    return report
