"""The Poisson pair (P0, P1) on gl(n) x gl(n) and its recursion operator.

Sign convention: the bracket of two functions is ``{f, g} = <dg, P df>``, so that
``{f, g}_0 = tr(eta_f xi_g - eta_g xi_f)`` and ``{tr B, tr A}_0 = n``.  With this
convention the hierarchy fields are ``X_k = -P0 dH_k = (0, A^(k-1))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matpair import (
    CovectorPair,
    PhasePoint,
    TangentPair,
    TraceExpr,
    commutator,
    grad_trace_expr,
)

__all__ = [
    "PencilSelector",
    "P0",
    "P1",
    "pencil",
    "as_selector",
    "p0_apply",
    "p0_inverse",
    "p1_apply",
    "pencil_apply",
    "recursion_apply",
    "recursion_transpose_apply",
    "bracket_covectors",
    "bracket_numeric",
    "necklace_bracket",
    "hamiltonian_expr",
    "hierarchy_hamiltonian",
    "hierarchy_differential",
    "hierarchy_field",
    "jacobi_defect",
    "nijenhuis_torsion_numeric",
]


@dataclass(frozen=True)
class PencilSelector:
    """The combination ``w0 * P0 + w1 * P1``.

    Use the module constants :data:`P0`, :data:`P1` or :func:`pencil` rather
    than building weights by hand.
    """

    w0: float
    w1: float
    label: str

    def __post_init__(self):
        if not (np.isfinite(self.w0) and np.isfinite(self.w1)):
            raise ValueError("pencil weights must be finite")

    def __str__(self) -> str:
        return self.label


P0 = PencilSelector(1.0, 0.0, "P0")
P1 = PencilSelector(0.0, 1.0, "P1")


def pencil(t: float) -> PencilSelector:
    """``P0 + t * P1``."""
    return PencilSelector(1.0, float(t), f"Pencil({t:g})")


def as_selector(s) -> PencilSelector:
    """Accept a selector, or the shorthands "P0"/"P1"."""
    if isinstance(s, PencilSelector):
        return s
    if s in ("P0", 0):
        return P0
    if s in ("P1", 1):
        return P1
    raise ValueError(f"unknown pencil selector {s!r}")


# ---------------------------------------------------------------------------
# tensors


def p0_apply(c: CovectorPair) -> TangentPair:
    return TangentPair(c.eta, -c.xi)


def p0_inverse(t: TangentPair) -> CovectorPair:
    return CovectorPair(-t.W, t.V)


def p1_apply(p: PhasePoint, c: CovectorPair) -> TangentPair:
    A, B = p.A, p.B
    return TangentPair(A @ c.eta, -c.xi @ A + commutator(B, c.eta))


def pencil_apply(s, p: PhasePoint, c: CovectorPair) -> TangentPair:
    s = as_selector(s)
    out0 = p0_apply(c)
    if s.w1 == 0.0:
        return s.w0 * out0
    return s.w0 * out0 + s.w1 * p1_apply(p, c)


def recursion_apply(p: PhasePoint, t: TangentPair) -> TangentPair:
    """``N = P1 P0^-1``: ``(V, W) -> (A V, [B, V] + W A)``."""
    return TangentPair(p.A @ t.V, commutator(p.B, t.V) + t.W @ p.A)


def recursion_transpose_apply(p: PhasePoint, c: CovectorPair) -> CovectorPair:
    """``N*``: ``(xi, eta) -> (xi A + [eta, B], A eta)``."""
    return CovectorPair(c.xi @ p.A + commutator(c.eta, p.B), p.A @ c.eta)


# ---------------------------------------------------------------------------
# brackets


def bracket_covectors(s, p: PhasePoint, c1: CovectorPair, c2: CovectorPair) -> float:
    """Bracket of two functions with differentials ``c1``, ``c2`` at ``p``."""
    s = as_selector(s)
    xi1, eta1 = c1
    xi2, eta2 = c2
    M = eta1 @ xi2 - eta2 @ xi1
    val = 0.0
    if s.w0:
        val += s.w0 * float(np.trace(M))
    if s.w1:
        val += s.w1 * float(np.trace(p.A @ M) + np.trace(p.B @ commutator(eta1, eta2)))
    return val


def bracket_numeric(s, f: TraceExpr, g: TraceExpr, p: PhasePoint) -> float:
    return bracket_covectors(s, p, grad_trace_expr(f, p), grad_trace_expr(g, p))


def _openings(word: str, letter: str) -> list[str]:
    # for every occurrence of `letter`, the rest of the word read cyclically after it
    return [word[i + 1:] + word[:i] for i, a in enumerate(word) if a == letter]


def _necklace_words(tensor: int, a: str, b: str) -> list[tuple[str, float]]:
    aA, aB = _openings(a, "A"), _openings(a, "B")
    bA, bB = _openings(b, "A"), _openings(b, "B")
    out: list[tuple[str, float]] = []
    if tensor == 0:
        out += [(u + v, 1.0) for u in aB for v in bA]
        out += [(v + u, -1.0) for u in aA for v in bB]
    else:
        out += [("A" + u + v, 1.0) for u in aB for v in bA]
        out += [("A" + v + u, -1.0) for u in aA for v in bB]
        for u in aB:
            for v in bB:
                out.append(("B" + u + v, 1.0))
                out.append(("B" + v + u, -1.0))
    return out


def necklace_bracket(s, f: TraceExpr, g: TraceExpr) -> TraceExpr:
    """Closed-form bracket of two trace expressions, again a trace expression."""
    s = as_selector(s)
    pairs: list[tuple[str, float]] = []
    for tensor, w in ((0, s.w0), (1, s.w1)):
        if not w:
            continue
        for a, ca in f.terms.items():
            for b, cb in g.terms.items():
                pairs += [(word, w * ca * cb * sign) for word, sign in _necklace_words(tensor, a, b)]
    return TraceExpr.from_pairs(pairs)


# ---------------------------------------------------------------------------
# hierarchy


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"hierarchy index must be an integer >= 1, got {k}")
    return int(k)


def hamiltonian_expr(k: int) -> TraceExpr:
    """``H_k = tr(A^k) / k`` as a trace expression."""
    k = _check_k(k)
    return TraceExpr.word("A" * k, 1.0 / k)


def hierarchy_hamiltonian(k: int, p: PhasePoint) -> float:
    k = _check_k(k)
    return float(np.trace(np.linalg.matrix_power(p.A, k))) / k


def hierarchy_differential(k: int, p: PhasePoint) -> CovectorPair:
    """``dH_k = (A^(k-1), 0)``."""
    k = _check_k(k)
    return CovectorPair(np.linalg.matrix_power(p.A, k - 1), np.zeros((p.n, p.n)))


def hierarchy_field(k: int, p: PhasePoint) -> TangentPair:
    """``X_k = -P0 dH_k = (0, A^(k-1))``."""
    k = _check_k(k)
    return TangentPair(np.zeros((p.n, p.n)), np.linalg.matrix_power(p.A, k - 1))


# ---------------------------------------------------------------------------
# verification machinery


def jacobi_defect(s, f: TraceExpr, g: TraceExpr, h: TraceExpr, p: PhasePoint) -> float:
    """Cyclic sum ``{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`` at ``p``.

    Inner brackets are exact trace expressions; only the outer bracket is
    evaluated numerically.
    """
    s = as_selector(s)
    total = 0.0
    for x, y, z in ((f, g, h), (g, h, f), (h, f, g)):
        total += bracket_numeric(s, x, necklace_bracket(s, y, z), p)
    return total


def _shift(p: PhasePoint, v: TangentPair, h: float) -> PhasePoint:
    return PhasePoint(p.A + h * v.V, p.B + h * v.W)


def _directional(field, p: PhasePoint, v: TangentPair, h: float) -> TangentPair:
    return (field(_shift(p, v, h)) - field(_shift(p, v, -h))) * (0.5 / h)


def nijenhuis_torsion_numeric(p: PhasePoint, t1: TangentPair, t2: TangentPair,
                              h: float | None = None) -> TangentPair:
    """Torsion of N on the constant vector fields ``t1``, ``t2`` at ``p``.

    Lie brackets of the fields ``N t1`` and ``N t2`` use central differences
    with step ``h`` (default ``1e-5 * (1 + ||p||)``).
    """
    if h is None:
        h = 1e-5 * (1.0 + p.norm())
    if h <= 0:
        raise ValueError("finite-difference step must be positive")

    def NX(q):
        return recursion_apply(q, t1)

    def NY(q):
        return recursion_apply(q, t2)

    def lie(U, V, Uval, Vval):
        # [U, V](p) = DV[U] - DU[V]; a constant field has zero derivative
        dV = _directional(V, p, Uval, h) if V is not None else 0 * Uval
        dU = _directional(U, p, Vval, h) if U is not None else 0 * Uval
        return dV - dU

    NXp, NYp = NX(p), NY(p)
    bracket_NX_NY = lie(NX, NY, NXp, NYp)
    bracket_NX_Y = lie(NX, None, NXp, t2)
    bracket_X_NY = lie(None, NY, t1, NYp)
    # [X, Y] = 0 for constant fields
    return bracket_NX_NY - recursion_apply(p, bracket_NX_Y + bracket_X_NY)
