"""Matrix pairs (A, B) in gl(n) x gl(n), the trace pairing, and trace-word functions.

A point of the phase space is a pair of real square matrices.  Covectors and
tangent vectors are also pairs of matrices, identified with each other through
``<(xi, eta), (V, W)> = tr(xi V) + tr(eta W)``.

Invariant functions are handled symbolically as :class:`TraceExpr`, finite
linear combinations of ``tr(a_1 ... a_r)`` with letters ``a_i`` in ``{A, B}``.
Their gradients are exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DomainError",
    "PhasePoint",
    "CovectorPair",
    "TangentPair",
    "TraceExpr",
    "MembershipReport",
    "pairing",
    "in_open_set_M",
    "grad_trace_expr",
    "eval_trace_expr",
    "conjugate",
    "commutator",
    "canonical_rotation",
    "random_phase_point",
]

DEFAULT_TOL = 1e-8


class DomainError(ValueError):
    """Input lies outside the open set on which an operation is defined."""


def _frozen(M) -> np.ndarray:
    arr = np.array(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


class _MatrixPair:
    """Shared plumbing for the three pair types."""

    _names: tuple[str, str]

    def _check(self):
        a, b = (getattr(self, k) for k in self._names)
        if a.shape != b.shape:
            raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")

    @property
    def n(self) -> int:
        return getattr(self, self._names[0]).shape[0]

    def __iter__(self):
        return iter(getattr(self, k) for k in self._names)

    def __add__(self, other):
        return type(self)(*(x + y for x, y in zip(self, other)))

    def __sub__(self, other):
        return type(self)(*(x - y for x, y in zip(self, other)))

    def __mul__(self, c: float):
        return type(self)(*(c * x for x in self))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(*(-x for x in self))

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(x * x) for x in self)))

    def allclose(self, other, atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return all(np.allclose(x, y, atol=atol, rtol=rtol) for x, y in zip(self, other))


@dataclass(frozen=True, eq=False)
class PhasePoint(_MatrixPair):
    A: np.ndarray
    B: np.ndarray
    _names = ("A", "B")

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A))
        object.__setattr__(self, "B", _frozen(self.B))
        self._check()
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise ValueError("phase point has non-finite entries")

    def to_dict(self) -> dict:
        return {"n": self.n, "A": self.A.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PhasePoint":
        p = cls(d["A"], d["B"])
        if "n" in d and int(d["n"]) != p.n:
            raise ValueError(f"declared n={d['n']} but matrices are {p.n}x{p.n}")
        return p


@dataclass(frozen=True, eq=False)
class CovectorPair(_MatrixPair):
    xi: np.ndarray
    eta: np.ndarray
    _names = ("xi", "eta")

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen(self.xi))
        object.__setattr__(self, "eta", _frozen(self.eta))
        self._check()


@dataclass(frozen=True, eq=False)
class TangentPair(_MatrixPair):
    V: np.ndarray
    W: np.ndarray
    _names = ("V", "W")

    def __post_init__(self):
        object.__setattr__(self, "V", _frozen(self.V))
        object.__setattr__(self, "W", _frozen(self.W))
        self._check()


def pairing(c: CovectorPair, t: TangentPair) -> float:
    """Trace pairing ``tr(xi V) + tr(eta W)``."""
    if c.n != t.n:
        raise ValueError(f"dimension mismatch: covector n={c.n}, tangent n={t.n}")
    # tr(XY) = sum(X * Y.T)
    return float(np.sum(c.xi * t.V.T) + np.sum(c.eta * t.W.T))


# ---------------------------------------------------------------------------
# trace words


def canonical_rotation(word: str) -> str:
    """Lexicographically least cyclic shift of ``word`` (``A < B``)."""
    if not word:
        return word
    return min(word[i:] + word[:i] for i in range(len(word)))


@dataclass(frozen=True, eq=False)
class TraceExpr:
    """Linear combination of cyclic trace words in the letters ``A`` and ``B``.

    Keys are stored in canonical rotation and zero coefficients are dropped.
    The empty word stands for ``tr(I) = n``.
    """

    terms: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        acc: dict[str, float] = {}
        for word, coeff in dict(self.terms).items():
            if set(word) - {"A", "B"}:
                raise ValueError(f"trace word {word!r} uses letters other than A, B")
            key = canonical_rotation(word)
            acc[key] = acc.get(key, 0.0) + float(coeff)
        object.__setattr__(self, "terms", {w: c for w, c in sorted(acc.items()) if c != 0.0})

    @classmethod
    def word(cls, word: str, coeff: float = 1.0) -> "TraceExpr":
        return cls({word: coeff})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "TraceExpr":
        acc: dict[str, float] = {}
        for w, c in pairs:
            key = canonical_rotation(w)
            acc[key] = acc.get(key, 0.0) + c
        return cls(acc)

    def __add__(self, other: "TraceExpr") -> "TraceExpr":
        acc = dict(self.terms)
        for w, c in other.terms.items():
            acc[w] = acc.get(w, 0.0) + c
        return TraceExpr(acc)

    def __neg__(self) -> "TraceExpr":
        return TraceExpr({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "TraceExpr") -> "TraceExpr":
        return self + (-other)

    def __mul__(self, c: float) -> "TraceExpr":
        return TraceExpr({w: c * v for w, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, TraceExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "TraceExpr(0)"
        parts = [f"{c:+g}*tr({w or 'I'})" for w, c in self.terms.items()]
        return "TraceExpr(" + " ".join(parts) + ")"

    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def to_dict(self) -> dict:
        return {"terms": [{"word": w, "coeff": c} for w, c in self.terms.items()]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TraceExpr":
        return cls.from_pairs((t["word"], float(t["coeff"])) for t in d["terms"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _word_product(word: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.eye(A.shape[0])
    for letter in word:
        out = out @ (A if letter == "A" else B)
    return out


def eval_trace_expr(f: TraceExpr, p: PhasePoint) -> float:
    total = 0.0
    for word, coeff in f.terms.items():
        total += coeff * float(np.trace(_word_product(word, p.A, p.B)))
    return total


def grad_trace_expr(f: TraceExpr, p: PhasePoint) -> CovectorPair:
    """Exact gradient of ``f`` at ``p`` under the trace pairing.

    For each occurrence of a letter, the contribution is the product of the
    remaining letters read cyclically starting just after it.
    """
    n = p.n
    xi = np.zeros((n, n))
    eta = np.zeros((n, n))
    for word, coeff in f.terms.items():
        for i, letter in enumerate(word):
            rest = _word_product(word[i + 1:] + word[:i], p.A, p.B)
            if letter == "A":
                xi += coeff * rest
            else:
                eta += coeff * rest
    return CovectorPair(xi, eta)


def conjugate(g: np.ndarray, p: PhasePoint, max_cond: float = 1e12) -> PhasePoint:
    """Simultaneous conjugation ``(g A g^-1, g B g^-1)``."""
    g = np.asarray(g, dtype=float)
    if g.shape != (p.n, p.n):
        raise ValueError(f"conjugating matrix has shape {g.shape}, expected {(p.n, p.n)}")
    if not np.isfinite(np.linalg.cond(g)) or np.linalg.cond(g) > max_cond:
        raise DomainError("conjugating matrix is singular")
    ginv = np.linalg.inv(g)
    return PhasePoint(g @ p.A @ ginv, g @ p.B @ ginv)


# ---------------------------------------------------------------------------
# membership in the open set M


@dataclass(frozen=True)
class MembershipReport:
    in_M: bool
    reasons: tuple[str, ...]
    gap: float

    def __bool__(self) -> bool:
        return self.in_M


def _real_spectrum(M: np.ndarray, tol: float) -> tuple[np.ndarray | None, np.ndarray | None, list[str], float]:
    """Eigen-decompose ``M`` and classify its spectrum.

    Returns ascending real eigenvalues, matching unit eigenvectors (or None when
    the spectrum is not real), diagnostic codes, and the relative gap.
    """
    try:
        w, S = np.linalg.eig(M)
    except np.linalg.LinAlgError:
        return None, None, ["eigenvalues-not-real"], 0.0
    scale = 1.0 + float(np.max(np.abs(w), initial=0.0))
    reasons = []
    if np.any(np.abs(w.imag) >= tol * scale):
        reasons.append("eigenvalues-not-real")
        return None, None, reasons, 0.0
    w = w.real
    order = np.argsort(w, kind="stable")
    w = w[order]
    S = np.real(S[:, order])
    gap = float(np.min(np.diff(w))) / scale if len(w) > 1 else np.inf
    if gap <= tol:
        reasons.append("eigenvalues-not-distinct")
    return w, S, reasons, gap


def _off_diagonal_min(M: np.ndarray) -> float:
    n = M.shape[0]
    if n < 2:
        return np.inf
    mask = ~np.eye(n, dtype=bool)
    return float(np.min(np.abs(M[mask])))


def in_open_set_M(p: PhasePoint, tol: float = DEFAULT_TOL) -> MembershipReport:
    """Diagnose membership of ``p`` in the open set M.

    The conditions are: both A and B have real, distinct eigenvalues; in a unit
    eigenbasis of B every off-diagonal entry of A is nonzero; and the same with
    the roles of A and B exchanged.  "Nonzero" means larger than
    ``tol * (1 + ||.||_F)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    wA, SA, rA, gA = _real_spectrum(p.A, tol)
    wB, SB, rB, gB = _real_spectrum(p.B, tol)
    reasons = list(dict.fromkeys(rA + rB))
    gap = min(gA, gB)

    def coupling(M, S):
        try:
            Mt = np.linalg.solve(S, M @ S)
        except np.linalg.LinAlgError:
            return 0.0
        return _off_diagonal_min(Mt) / (1.0 + np.linalg.norm(M))

    if SB is not None and "eigenvalues-not-distinct" not in rB:
        if coupling(p.A, SB) <= tol:
            reasons.append("zero-coupling-entry-AB")
    if SA is not None and "eigenvalues-not-distinct" not in rA:
        if coupling(p.B, SA) <= tol:
            reasons.append("zero-coupling-entry-BA")
    return MembershipReport(not reasons, tuple(reasons), float(gap))


def random_phase_point(n: int, rng: np.random.Generator, tol: float = DEFAULT_TOL,
                       max_tries: int = 10_000) -> PhasePoint:
    """Rejection-sample a point of M with i.i.d. uniform [-1, 1] entries."""
    for _ in range(max_tries):
        p = PhasePoint(rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, n)))
        if in_open_set_M(p, tol).in_M:
            return p
    raise DomainError(f"no point of M found in {max_tries} samples (n={n})")
