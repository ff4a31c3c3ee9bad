"""Fixed-step RK4 integration of the hierarchy flows with conservation monitoring."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmspace import CMState, cm_flow, embed_Q, invariants_map, mu_matrix
from .matpair import DomainError, PhasePoint, commutator, in_open_set_M
from .reduction import SectionPoint, projected_flow

__all__ = ["IntegrationConfig", "DriftReport", "Trajectory", "rk4_step", "integrate_flow"]

# membership checks during integration are looser than the defaults: they
# detect collapse of the open set, not generic position
_EXIT_TOL = 1e-6


@dataclass(frozen=True)
class IntegrationConfig:
    k: int
    t_end: float
    dt: float
    space: str = "Q"
    record_stride: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("flow index must be an integer >= 1")
        if not (self.t_end > 0 and self.dt > 0 and self.dt < self.t_end):
            raise ValueError("need 0 < dt < t_end")
        if self.space not in ("P", "Q"):
            raise ValueError("space must be 'P' or 'Q'")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be an integer >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class DriftReport:
    """Conservation diagnostics over a trajectory.

    ``invariant_drift[k-1]`` is ``max_t |I_k(t) - I_k(0)| / (1 + |I_k(0)|)``.
    ``constraint_residual`` is ``max_t ||[B, A] - mu||_F`` along runs that start
    on Q, and None otherwise.
    """

    invariant_drift: list[float]
    constraint_residual: float | None
    domain_exit: bool = False
    exit_time: float | None = None
    exit_reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "invariant_drift": list(self.invariant_drift),
            "constraint_residual": self.constraint_residual,
            "domain_exit": self.domain_exit,
            "exit_time": self.exit_time,
            "exit_reason": self.exit_reason,
        }


@dataclass
class Trajectory:
    space: str
    n: int
    t: list[float] = field(default_factory=list)
    states: list = field(default_factory=list)  # CMState or SectionPoint
    I: list[np.ndarray] = field(default_factory=list)
    J: list[np.ndarray] = field(default_factory=list)

    def header(self) -> list[str]:
        n = self.n
        if self.space == "Q":
            cols = [f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)]
        else:
            cols = [f"A{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
            cols += [f"B{i}" for i in range(1, n + 1)]
        cols += [f"I{i}" for i in range(1, n + 1)]
        if self.space == "P":
            cols += [f"J{i}" for i in range(1, n + 1)]
        return ["t"] + cols

    def rows(self) -> list[list[float]]:
        out = []
        for t, s, I, J in zip(self.t, self.states, self.I, self.J):
            if self.space == "Q":
                vals = list(s.x) + list(s.y) + list(I)
            else:
                vals = list(s.A.ravel()) + list(np.diag(s.B)) + list(I) + list(J)
            out.append([t] + [float(v) for v in vals])
        return out


def rk4_step(f: Callable[[np.ndarray], np.ndarray], u: np.ndarray, h: float,
             project: Callable[[np.ndarray], np.ndarray] = lambda v: v) -> np.ndarray:
    """One classic fourth-order Runge-Kutta step; ``project`` is applied to every stage."""
    k1 = f(u)
    k2 = f(project(u + 0.5 * h * k1))
    k3 = f(project(u + 0.5 * h * k2))
    k4 = f(project(u + h * k3))
    return project(u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


# ---------------------------------------------------------------------------
# state packing


def _q_pack(c: CMState) -> np.ndarray:
    return np.concatenate([c.x, c.y])


def _q_unpack(u: np.ndarray, n: int) -> CMState:
    return CMState(u[:n], u[n:])


def _p_pack(sp: SectionPoint) -> np.ndarray:
    return np.concatenate([sp.A.ravel(), np.diag(sp.B)])


def _p_unpack(u: np.ndarray, n: int, pattern) -> SectionPoint:
    A = u[: n * n].reshape(n, n)
    return SectionPoint(PhasePoint(A, np.diag(u[n * n:])), pattern)


def _p_projector(n: int, pattern):
    eps = np.asarray(pattern, dtype=float)
    idx = np.arange(n - 1)

    def project(u):
        # keep A[i, i+1] = eps_i A[i+1, i] exact; RK stages drift by rounding only
        u = u.copy()
        A = u[: n * n].reshape(n, n)
        A[idx, idx + 1] = eps * A[idx + 1, idx]
        return u

    return project


def _domain_check_Q(u: np.ndarray, n: int) -> str | None:
    if not np.all(np.isfinite(u)):
        return "non-finite state"
    if np.any(np.diff(u[:n]) <= 0):
        return "particle ordering violated"
    if not in_open_set_M(embed_Q(_q_unpack(u, n)), _EXIT_TOL).in_M:
        return "eigenvalue gap collapse"
    return None


def _domain_check_P(u: np.ndarray, n: int) -> str | None:
    if not np.all(np.isfinite(u)):
        return "non-finite state"
    A = u[: n * n].reshape(n, n)
    if np.any(np.diag(A, -1) <= 0):
        return "section sign flip"
    if np.any(np.diff(u[n * n:]) <= 0):
        return "eigenvalue ordering of B violated"
    if not in_open_set_M(PhasePoint(A, np.diag(u[n * n:])), _EXIT_TOL).in_M:
        return "eigenvalue gap collapse"
    return None


def _constraint_residual(p: PhasePoint) -> float:
    return float(np.linalg.norm(commutator(p.B, p.A) - mu_matrix(p.n)))


def integrate_flow(start: SectionPoint | CMState, cfg: IntegrationConfig) -> tuple[Trajectory, DriftReport]:
    """Integrate the ``cfg.k``-th flow on P or on Q from ``start``.

    Integration halts at the first step that leaves the domain (particle
    collision or reordering, loss of real distinct spectrum, section sign flip);
    the partial trajectory is returned with the exit flagged in the report.
    """
    k = int(cfg.k)
    if cfg.space == "Q":
        if not isinstance(start, CMState):
            raise TypeError("a Q run starts from a CMState")
        n = start.n
        u = _q_pack(start)

        def f(v):
            xdot, ydot = cm_flow(_q_unpack(v, n), k)
            return np.concatenate([xdot, ydot])

        project = lambda v: v  # noqa: E731
        check = _domain_check_Q
        as_state = lambda v: _q_unpack(v, n)  # noqa: E731
        as_point = lambda s: embed_Q(s)  # noqa: E731
        on_Q = True
    else:
        if not isinstance(start, SectionPoint):
            raise TypeError("a P run starts from a SectionPoint")
        n = start.n
        pattern = start.pattern
        u = _p_pack(start)

        def f(v):
            t = projected_flow(_p_unpack(v, n, pattern), k)
            return np.concatenate([t.V.ravel(), np.diag(t.W)])

        project = _p_projector(n, pattern)
        check = _domain_check_P
        as_state = lambda v: _p_unpack(v, n, pattern)  # noqa: E731
        as_point = lambda s: s.point  # noqa: E731
        on_Q = _constraint_residual(start.point) < 1e-8

    reason = check(u, n)
    if reason is not None:
        raise DomainError(f"invalid start: {reason}")

    traj = Trajectory(cfg.space, n)
    I0 = np.array(invariants_map(as_point(as_state(u))).I)
    drift = np.zeros(n)
    residual = 0.0 if on_Q else None

    def record(t, state):
        v = invariants_map(as_point(state))
        traj.t.append(t)
        traj.states.append(state)
        traj.I.append(np.array(v.I))
        traj.J.append(np.array(v.J))

    def monitor(state):
        nonlocal drift, residual
        p = as_point(state)
        I = np.array(invariants_map(p).I)
        drift = np.maximum(drift, np.abs(I - I0) / (1.0 + np.abs(I0)))
        if on_Q:
            residual = max(residual, _constraint_residual(p))

    state = as_state(u)
    record(0.0, state)
    monitor(state)
    report = DriftReport([], None)
    for step in range(1, cfg.n_steps + 1):
        t = step * cfg.dt
        try:
            u_new = rk4_step(f, u, cfg.dt, project)
            reason = check(u_new, n)
        except (DomainError, np.linalg.LinAlgError, FloatingPointError) as exc:
            reason = str(exc)
        if reason is not None:
            report.domain_exit = True
            report.exit_time = t
            report.exit_reason = reason
            if traj.t[-1] != (step - 1) * cfg.dt:
                record((step - 1) * cfg.dt, state)
            break
        u = u_new
        state = as_state(u)
        monitor(state)
        if step % cfg.record_stride == 0 or step == cfg.n_steps:
            record(t, state)
    report.invariant_drift = [float(d) for d in drift]
    report.constraint_residual = residual
    return traj, report
