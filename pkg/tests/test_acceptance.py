"""Acceptance criteria, one test per criterion.

Each test records a ``criterion NN PASS|FAIL`` line; the lines are printed in
the pytest terminal summary and also when this file is run as a script.
"""
import numpy as np
import sympy as sp

from calogero_pencil.cmspace import (
    QPrimeData,
    bracket_table,
    cm_flow,
    duality_swap,
    embed_Q,
    embed_Q_prime,
    evaluate_bracket_IJ,
    exchanged_bracket,
    I_expr,
    J_expr,
    invariant_symbols,
    invariants_map,
    mu_matrix,
    n2_bracket1_matrix,
    n2_discriminant,
    normalize_to_Q,
    pi_inverse,
    random_cm_state,
    rank1_check,
    transported_xy_brackets,
    xi_closed_form,
)
from calogero_pencil.integrate import IntegrationConfig, integrate_flow
from calogero_pencil.matpair import PhasePoint, TangentPair, commutator, conjugate, eval_trace_expr, random_phase_point
from calogero_pencil.pencil import (
    P0,
    P1,
    bracket_numeric,
    hamiltonian_expr,
    hierarchy_differential,
    jacobi_defect,
    necklace_bracket,
    nijenhuis_torsion_numeric,
    pencil,
    recursion_transpose_apply,
)
from calogero_pencil.reduction import (
    SectionPoint,
    canonical_form,
    random_conjugator,
    random_section_point,
    tangent_decompose,
)
from calogero_pencil.verify import random_trace_expr, swap_substitute

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

SEED = 2024


def rng_for(criterion, trial):
    return np.random.default_rng([SEED, criterion, trial])


def record(num, title, checks):
    """``checks`` is a list of (label, value, tol); a check passes when value < tol."""
    ok = all(v < tol for _, v, tol in checks)
    detail = "; ".join(f"{label} {v} < {tol}" if isinstance(v, (int, np.integer))
                       else f"{label} {v:.2e} < {tol:.0e}" for label, v, tol in checks)
    line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def raw_point(rng, n):
    return PhasePoint(rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, n)))


def test_criterion_01_necklace_vs_numeric():
    worst = 0.0
    for trial in range(200):
        rng = rng_for(1, trial)
        n = 1 + trial % 4
        p = raw_point(rng, n)
        f, g = random_trace_expr(rng, 5, 2), random_trace_expr(rng, 5, 2)
        for s in (P0, P1):
            worst = max(worst, rel(eval_trace_expr(necklace_bracket(s, f, g), p), bracket_numeric(s, f, g, p)))
    record(1, "necklace vs numeric brackets (200 trials, n<=4, |w|<=5)", [("max rel defect", worst, 1e-10)])


def test_criterion_02_jacobi_and_compatibility():
    selectors = (P0, P1, pencil(-1.0), pencil(0.5), pencil(2.0))
    worst = 0.0
    for trial in range(50):
        rng = rng_for(2, trial)
        p = raw_point(rng, 2 + trial % 3)
        f, g, h = (random_trace_expr(rng, 4) for _ in range(3))
        for s in selectors:
            worst = max(worst, abs(jacobi_defect(s, f, g, h, p)))
    record(2, "Jacobi for P0, P1, P0+tP1 (50 points)", [("max defect", worst, 1e-8)])


def test_criterion_03_ladder_and_involutivity():
    ladder = invol = 0.0
    for trial in range(20):
        rng = rng_for(3, trial)
        n = 2 + trial % 4
        p = raw_point(rng, n)
        for k in range(1, 2 * n + 1):
            lhs = recursion_transpose_apply(p, hierarchy_differential(k, p))
            rhs = hierarchy_differential(k + 1, p)
            ladder = max(ladder, float(np.max(np.abs(lhs.xi - rhs.xi))), float(np.max(np.abs(lhs.eta - rhs.eta))))
            for l in range(1, 2 * n + 1):
                for s in (P0, P1):
                    invol = max(invol, abs(bracket_numeric(s, hamiltonian_expr(k), hamiltonian_expr(l), p)))
    record(3, "recursion ladder and involutivity (k,l<=2n)",
           [("ladder defect", ladder, 1e-12), ("max |{H_k,H_l}|", invol, 1e-10)])


def test_criterion_04_reduction_roundtrip():
    recover = residual = 0.0
    pattern_mismatch = 0
    for trial in range(100):
        rng = rng_for(4, trial)
        n = 2 + trial % 4
        q = random_section_point(n, rng)
        g = random_conjugator(n, rng)
        sp_, _ = canonical_form(conjugate(g, q.point))
        pattern_mismatch += sp_.pattern != q.pattern
        recover = max(recover, float(np.max(np.abs(sp_.A - q.A))), float(np.max(np.abs(sp_.B - q.B))))
        t = TangentPair(rng.normal(size=(n, n)), rng.normal(size=(n, n)))
        dec = tangent_decompose(q, t)
        residual = max(residual, (t - dec.section_tangent - dec.orbit_part(q)).norm() / (1 + t.norm()))
    record(4, "canonical form round-trip and decomposition (100 trials)",
           [("pattern mismatches", pattern_mismatch, 1), ("max entry error", recover, 1e-8),
            ("max residual", residual, 1e-10)])


def _labels(n):
    return [("I", k) for k in range(1, n + 1)] + [("J", k) for k in range(1, n + 1)]


def test_criterion_05_invariant_bracket_table():
    worst = 0.0
    for trial in range(50):
        rng = rng_for(5, trial)
        n = 2 + trial % 4
        p = random_phase_point(n, rng, tol=1e-3)
        v = invariants_map(p)
        for s in (P0, P1):
            for a, k in _labels(n):
                for b, l in _labels(n):
                    f = I_expr(k) if a == "I" else J_expr(k)
                    g = I_expr(l) if b == "I" else J_expr(l)
                    lifted = eval_trace_expr(necklace_bracket(s, f, g), p)
                    worst = max(worst, rel(lifted, evaluate_bracket_IJ(s, a, k, b, l, v)))
    (I1, I2), (J1, J2) = invariant_symbols(2)
    literal = {
        (0, "I1", "I2"): 0, (0, "J1", "I1"): 2, (0, "J1", "I2"): I1, (0, "J2", "I1"): I1,
        (0, "J2", "I2"): 2 * I2, (0, "J1", "J2"): J1,
        (1, "I1", "I2"): 0, (1, "J1", "I1"): I1, (1, "J1", "I2"): 2 * I2, (1, "J2", "I1"): 2 * I2,
        (1, "J2", "I2"): 3 * I1 * I2 - sp.Rational(1, 2) * I1 ** 3, (1, "J1", "J2"): J2,
    }
    tables = {t: {(u, w): e for u, w, e in bracket_table(s, 2)} for t, s in ((0, P0), (1, P1))}
    mismatches = sum(sp.expand(tables[t][(u, w)] - e) != 0 for (t, u, w), e in literal.items())
    record(5, "invariant bracket tables (50 points, n<=5) and the n=2 table",
           [("max rel defect", worst, 1e-9), ("n=2 literal mismatches", mismatches, 1)])


def test_criterion_06_Q_machinery():
    false_neg = false_pos = 0
    normalize = tangency = 0.0
    for trial in range(100):
        rng = rng_for(6, trial)
        n = 2 + trial % 4
        c = random_cm_state(n, rng)
        g = random_conjugator(n, rng)
        pq = conjugate(g, embed_Q(c))
        false_neg += not rank1_check(pq)
        false_pos += rank1_check(random_phase_point(n, rng, tol=1e-3))
        back = normalize_to_Q(pq)
        normalize = max(normalize, float(np.max(np.abs(back.x - c.x))), float(np.max(np.abs(back.y - c.y))))
        sp_ = SectionPoint.from_point(embed_Q(c))
        for k in range(1, n + 1):
            Ak = np.linalg.matrix_power(sp_.A, k - 1)
            xi = tangent_decompose(sp_, TangentPair(np.zeros((n, n)), Ak)).generator
            diff = xi - xi_closed_form(c, k)
            diff -= np.trace(diff) / n * np.eye(n)
            tangency = max(tangency, float(np.max(np.abs(diff))))
    record(6, "rank-1 detection, normalize_to_Q, generator closed form",
           [("false negatives", false_neg, 1), ("false positives", false_pos, 1),
            ("normalize error", normalize, 1e-8), ("generator error", tangency, 1e-9)])


def test_criterion_07_n2_oracle():
    worst = canon = 0.0
    used = trial = 0
    canonical = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    while used < 100:
        rng = rng_for(7, trial)
        trial += 1
        c = random_cm_state(2, rng)
        if abs(n2_discriminant(c)) <= 0.1:
            continue
        used += 1
        closed = n2_bracket1_matrix(c)
        worst = max(worst, float(np.max(np.abs(transported_xy_brackets(P1, c) - closed) / (1 + np.abs(closed)))))
        canon = max(canon, float(np.max(np.abs(transported_xy_brackets(P0, c) - canonical))))
    record(7, "n=2 transported brackets vs closed form (100 points, |Delta|>0.1)",
           [("second bracket defect", worst, 1e-9), ("first bracket vs canonical", canon, 1e-9)])


def _ydot_oracle(c):
    # brute force: diagonal of [xi_2, L] from the explicit entries
    n = c.n
    L = np.zeros((n, n))
    xi = np.zeros((n, n))
    for i in range(n):
        L[i, i] = c.y[i]
        for j in range(n):
            if i != j:
                L[i, j] = 1.0 / (c.x[i] - c.x[j])
                xi[i, j] = 1.0 / (c.x[i] - c.x[j]) ** 2
        xi[i, i] = -sum(1.0 / (c.x[i] - c.x[j]) ** 2 for j in range(n) if j != i)
    return np.diag(xi @ L - L @ xi)


def test_criterion_08_dynamics():
    c = random_cm_state(3, rng_for(8, 0), separating=True)
    cfg = IntegrationConfig(2, 1.0, 1e-3, space="Q")
    traj, report = integrate_flow(c, cfg)
    residual_q = max(float(np.linalg.norm(commutator(embed_Q(s).B, embed_Q(s).A) - mu_matrix(3)))
                     for s in traj.states)
    # the same flow on the section, started from the embedded point
    traj_p, report_p = integrate_flow(SectionPoint.from_point(embed_Q(c)),
                                      IntegrationConfig(2, 1.0, 1e-3, space="P"))
    residual_p = max(float(np.linalg.norm(commutator(s.B, s.A) - mu_matrix(3))) for s in traj_p.states)
    exits = int(report.domain_exit) + int(report_p.domain_exit)
    flow = 0.0
    for trial in range(20):
        cc = random_cm_state(2 + trial % 4, rng_for(8, trial + 1))
        xdot, ydot = cm_flow(cc, 2)
        d = cc.x[:, None] - cc.x[None, :]
        np.fill_diagonal(d, np.inf)
        newton = -2.0 * (d ** -3.0).sum(axis=1)
        flow = max(flow, float(np.max(np.abs(xdot - cc.y))), float(np.max(np.abs(ydot - _ydot_oracle(cc)))),
                   float(np.max(np.abs(ydot - newton))))
    record(8, "RK4 k=2 flow on Q (n=3, t=1, dt=1e-3) and the Newton form",
           [("domain exits", exits, 1), ("max I drift", max(report.invariant_drift), 1e-8),
            ("max I drift (section run)", max(report_p.invariant_drift), 1e-8),
            ("||[B,A]-mu|| Q run", residual_q, 1e-6), ("||[B,A]-mu|| section run", residual_p, 1e-6),
            ("flow vs oracle", flow, 1e-10)])


def test_criterion_09_pi_inverse():
    worst = 0.0
    for trial in range(100):
        rng = rng_for(9, trial)
        n = 1 + trial % 5
        while True:
            lam = np.sort(rng.uniform(-2, 2, n))
            if n == 1 or np.min(np.diff(lam)) > 0.3:
                break
        q = QPrimeData(lam, rng.uniform(-2, 2, n))
        back = pi_inverse(invariants_map(embed_Q_prime(q)))
        worst = max(worst, float(np.max(np.abs(back.lam - q.lam))), float(np.max(np.abs(back.mu - q.mu))))
    record(9, "pi_inverse after invariants_map on Q' (100 points, n<=5)", [("max error", worst, 1e-8)])


def test_criterion_10_torsion():
    worst = 0.0
    for trial in range(50):
        rng = rng_for(10, trial)
        p = raw_point(rng, 3)
        t1 = TangentPair(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        t2 = TangentPair(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        T = nijenhuis_torsion_numeric(p, t1, t2, h=1e-5)
        worst = max(worst, max(np.abs(T.V).max(), np.abs(T.W).max()) / (1 + p.norm() ** 2))
    record(10, "Nijenhuis torsion of N (50 points, n=3)", [("max scaled torsion", worst, 1e-6)])


def test_criterion_11_duality():
    worst = 0.0
    for trial in range(50):
        rng = rng_for(11, trial)
        p = raw_point(rng, 2 + trial % 3)
        f, g = random_trace_expr(rng, 5, 2), random_trace_expr(rng, 5, 2)
        for s in (P0, P1):
            pushed = bracket_numeric(s, swap_substitute(f), swap_substitute(g), p)
            worst = max(worst, rel(pushed, exchanged_bracket(s, f, g, duality_swap(p))))
    record(11, "duality (A,B) -> (-B,A) pushes brackets to the exchanged pair", [("max rel defect", worst, 1e-10)])


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
