"""Reduction by simultaneous conjugation onto the section P.

A point of P has ``B`` diagonal with strictly increasing entries and ``A`` with
``A[i+1, i] > 0`` and ``A[i, i+1] = eps_i * A[i+1, i]``.  Every conjugation
orbit in M meets P exactly once.  Tangent vectors at a section point split
uniquely into a part tangent to P and an infinitesimal conjugation
``([A, xi], [B, xi])``; the generator ``xi`` is normalized to be trace-free.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matpair import (
    DEFAULT_TOL,
    DomainError,
    PhasePoint,
    TangentPair,
    commutator,
    in_open_set_M,
)

__all__ = [
    "SectionPoint",
    "Decomposition",
    "sorted_eigenbasis",
    "canonical_form",
    "tangent_decompose",
    "diagonal_generator_system",
    "projected_flow",
    "random_section_point",
    "random_conjugator",
    "check_section",
]


@dataclass(frozen=True, eq=False)
class SectionPoint:
    point: PhasePoint
    pattern: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(int(e) for e in self.pattern))
        check_section(self.point, self.pattern)

    @property
    def A(self) -> np.ndarray:
        return self.point.A

    @property
    def B(self) -> np.ndarray:
        return self.point.B

    @property
    def n(self) -> int:
        return self.point.n

    @classmethod
    def from_point(cls, p: PhasePoint) -> "SectionPoint":
        """Read off the sign pattern of a point already lying in P."""
        A = p.A
        sub = np.diag(A, -1)
        sup = np.diag(A, 1)
        if np.any(sub <= 0):
            raise DomainError("subdiagonal of A must be positive on the section")
        return cls(p, tuple(int(np.sign(s)) for s in sup / sub))


def check_section(p: PhasePoint, eps, rtol: float = 1e-12) -> None:
    n = p.n
    if len(eps) != n - 1:
        raise ValueError(f"sign pattern has length {len(eps)}, expected {n - 1}")
    if any(e not in (1, -1) for e in eps):
        raise ValueError(f"sign pattern entries must be +1 or -1, got {eps}")
    B, A = p.B, p.A
    if np.any(B[~np.eye(n, dtype=bool)] != 0.0):
        raise DomainError("B is not diagonal")
    if np.any(np.diff(np.diag(B)) <= 0):
        raise DomainError("diagonal of B is not strictly increasing")
    sub = np.diag(A, -1)
    sup = np.diag(A, 1)
    if np.any(sub <= 0):
        raise DomainError("subdiagonal of A must be positive on the section")
    e = np.asarray(eps, dtype=float)
    if not np.allclose(sup, e * sub, rtol=rtol, atol=0.0):
        raise DomainError("superdiagonal of A does not match the sign pattern")


@dataclass(frozen=True, eq=False)
class Decomposition:
    section_tangent: TangentPair
    generator: np.ndarray

    def orbit_part(self, sp: SectionPoint) -> TangentPair:
        xi = self.generator
        return TangentPair(commutator(sp.A, xi), commutator(sp.B, xi))


def sorted_eigenbasis(M: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Real eigenvalues in ascending order and unit eigenvectors as columns.

    Each eigenvector is signed so that its first nonzero entry is positive.
    A matrix that is already diagonal gets a permutation basis, exactly.
    """
    n = M.shape[0]
    if not np.any(M[~np.eye(n, dtype=bool)]):
        w = np.diag(M).copy()
        order = np.argsort(w, kind="stable")
        return w[order], np.eye(n)[:, order]
    w, S = np.linalg.eig(M)
    scale = 1.0 + float(np.max(np.abs(w)))
    if np.any(np.abs(w.imag) >= tol * scale):
        raise DomainError("eigenvalues are not real")
    w = w.real
    S = np.real(S)
    order = np.argsort(w, kind="stable")
    w, S = w[order], S[:, order]
    if n > 1 and np.min(np.diff(w)) <= tol * scale:
        raise DomainError("eigenvalues are not distinct")
    S = S / np.linalg.norm(S, axis=0)
    for j in range(n):
        nz = np.flatnonzero(np.abs(S[:, j]) > 1e-14)
        if S[nz[0], j] < 0:
            S[:, j] = -S[:, j]
    return w, S


def canonical_form(p: PhasePoint, tol: float = DEFAULT_TOL) -> tuple[SectionPoint, np.ndarray]:
    """The unique point of P on the orbit of ``p``, and ``g`` with ``g.p`` equal to it."""
    report = in_open_set_M(p, tol)
    if not report.in_M:
        raise DomainError(f"point is not in M: {', '.join(report.reasons)}")
    n = p.n
    w, S = sorted_eigenbasis(p.B, tol)
    Sinv = np.linalg.inv(S)
    A = Sinv @ p.A @ S
    sub = np.diag(A, -1)
    sup = np.diag(A, 1)
    eps = np.sign(sup / sub).astype(int)
    # d_i / d_{i+1} = +-sqrt(eps_i A_{i+1,i} / A_{i,i+1}), sign making d_{i+1} A_{i+1,i} / d_i > 0
    d = np.ones(n)
    for i in range(n - 2, -1, -1):
        ratio = np.sqrt(eps[i] * sub[i] / sup[i])
        if sub[i] < 0:
            ratio = -ratio
        d[i] = ratio * d[i + 1]
    g = d[:, None] * Sinv
    A_sec = (d[:, None] * A) / d[None, :]
    # enforce the exact section relations that hold up to rounding
    sub_sec = np.diag(A_sec, -1).copy()
    for i in range(n - 1):
        A_sec[i, i + 1] = eps[i] * sub_sec[i]
    sp = SectionPoint(PhasePoint(A_sec, np.diag(w)), tuple(eps))
    return sp, g


def _split_generator(sp: SectionPoint, t: TangentPair) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal part of the generator and the right-hand side of the diagonal system."""
    A, b = sp.A, np.diag(sp.B)
    n = sp.n
    gaps = b[:, None] - b[None, :]
    np.fill_diagonal(gaps, 1.0)
    xi_off = t.W / gaps
    np.fill_diagonal(xi_off, 0.0)
    R = t.V - commutator(A, xi_off)
    eps = np.asarray(sp.pattern, dtype=float)
    idx = np.arange(n - 1)
    rhs = R[idx, idx + 1] - eps * R[idx + 1, idx]
    return xi_off, rhs


def diagonal_generator_system(sp: SectionPoint) -> np.ndarray:
    """Coefficient matrix of the (n-1) x n linear system for the diagonal of the generator.

    Row ``i`` reads ``2 eps_i A[i+1, i] (xi[i+1, i+1] - xi[i, i]) = rhs_i``.
    """
    n = sp.n
    M = np.zeros((n - 1, n))
    for i in range(n - 1):
        c = 2.0 * sp.pattern[i] * sp.A[i + 1, i]
        M[i, i] = -c
        M[i, i + 1] = c
    return M


def tangent_decompose(sp: SectionPoint, t: TangentPair) -> Decomposition:
    """Split ``t`` as (tangent to P) + ``([A, xi], [B, xi])`` with ``tr xi = 0``."""
    if t.n != sp.n:
        raise ValueError("dimension mismatch")
    xi_off, rhs = _split_generator(sp, t)
    n = sp.n
    eps = np.asarray(sp.pattern, dtype=float)
    sub = np.diag(sp.A, -1)
    diffs = rhs / (2.0 * eps * sub)
    delta = np.concatenate([[0.0], np.cumsum(diffs)])
    delta -= delta.mean()
    xi = xi_off + np.diag(delta)
    orbit = TangentPair(commutator(sp.A, xi), commutator(sp.B, xi))
    sec = t - orbit
    # the section part of W is diagonal by construction
    W = np.diag(np.diag(sec.W))
    V = sec.V.copy()
    idx = np.arange(n - 1)
    V[idx, idx + 1] = 0.5 * (V[idx, idx + 1] + eps * V[idx + 1, idx])
    V[idx + 1, idx] = eps * V[idx, idx + 1]
    return Decomposition(TangentPair(V, W), xi)


def projected_flow(sp: SectionPoint, k: int) -> TangentPair:
    """The hierarchy field ``(0, A^(k-1))`` projected to the section along orbits."""
    if int(k) != k or k < 1:
        raise ValueError(f"hierarchy index must be an integer >= 1, got {k}")
    Ak = np.linalg.matrix_power(sp.A, int(k) - 1)
    dec = tangent_decompose(sp, TangentPair(np.zeros_like(Ak), Ak))
    return dec.section_tangent


def random_section_point(n: int, rng: np.random.Generator, pattern=None,
                         tol: float = 1e-3, max_tries: int = 10_000) -> SectionPoint:
    """Sample a point of P with moderate entries and comfortably in M."""
    for _ in range(max_tries):
        b = np.sort(rng.uniform(-2, 2, n))
        if n > 1 and np.min(np.diff(b)) < 0.2:
            continue
        A = rng.uniform(-1, 1, (n, n))
        sub = rng.uniform(0.3, 1.0, n - 1)
        eps = (tuple(rng.choice([-1, 1], n - 1)) if pattern is None else tuple(pattern))
        idx = np.arange(n - 1)
        A[idx + 1, idx] = sub
        A[idx, idx + 1] = np.asarray(eps) * sub
        p = PhasePoint(A, np.diag(b))
        if in_open_set_M(p, tol).in_M:
            return SectionPoint(p, eps)
    raise DomainError(f"no section point found in {max_tries} samples (n={n})")


def random_conjugator(n: int, rng: np.random.Generator, max_cond: float = 20.0) -> np.ndarray:
    """Random matrix with condition number at most ``max_cond``."""
    while True:
        g = np.eye(n) + rng.uniform(-0.5, 0.5, (n, n))
        if np.linalg.cond(g) <= max_cond:
            return g

