"""Crank-Nicolson propagation of ``i psi_t = -psi_xx + U(x, t) psi``.

Independent of any transformation machinery: it only needs potential
values on the grid.  Homogeneous Dirichlet conditions at the box edges; the
potential is sampled at the midpoint of every step, which keeps the scheme
second order and exactly unitary for real ``U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import BoxTooSmallError, DomainError


@dataclass
class PropagationRun:
    potential: Callable          # U(x, t), vectorised in x
    box: tuple[float, float]
    h: float
    tau: float
    t_final: float
    initial: Callable | np.ndarray  # psi(x) on the interior nodes, or a callable of x
    t0: float = 0.0
    snapshots: tuple = ()
    leak_tol: float = 1e-8
    exact: Callable | None = None  # exact(x, t) for error reporting

    def __post_init__(self):
        if not self.h > 0 or not self.tau > 0:
            raise DomainError("h and tau must be positive")
        if not self.box[1] > self.box[0]:
            raise DomainError("empty box")
        if not self.t_final >= self.t0:
            raise DomainError("t_final must not precede t0")

    @property
    def x(self) -> np.ndarray:
        """Interior nodes (the edges carry the Dirichlet zeros)."""
        n = int(round((self.box[1] - self.box[0]) / self.h))
        return np.linspace(self.box[0], self.box[1], n + 1)[1:-1]

    def refined(self, factor: int = 2) -> "PropagationRun":
        return PropagationRun(self.potential, self.box, self.h / factor, self.tau / factor,
                              self.t_final, self.initial, self.t0, self.snapshots,
                              self.leak_tol, self.exact)


@dataclass
class PropagationResult:
    x: np.ndarray
    t: float
    psi: np.ndarray
    norm_drift: float
    boundary_max: float
    steps: int
    snapshots: dict = field(default_factory=dict)
    norm_log: list = field(default_factory=list)

    def l2(self, other: np.ndarray) -> float:
        """Discrete L2 norm of ``psi - other``."""
        dx = self.x[1] - self.x[0]
        return float(np.sqrt(dx * np.sum(np.abs(self.psi - other) ** 2)))


def _norm2(psi, dx):
    return float(dx * np.vdot(psi, psi).real)


def propagate(run: PropagationRun, check_leak: bool = True) -> PropagationResult:
    x = run.x
    dx = x[1] - x[0]
    psi = np.asarray(run.initial(x) if callable(run.initial) else run.initial, dtype=complex).copy()
    if psi.shape != x.shape:
        raise DomainError(f"initial state has {psi.size} values for {x.size} interior nodes")
    steps = int(round((run.t_final - run.t0) / run.tau))
    tau = (run.t_final - run.t0) / steps if steps else 0.0
    n0 = _norm2(psi, dx)
    scale = float(np.max(np.abs(psi))) or 1.0
    off = -1.0 / dx ** 2          # -d2/dx2 off-diagonal
    a = 0.5j * tau
    lhs = np.zeros((3, x.size), complex)
    lhs[0, 1:] = a * off
    lhs[2, :-1] = a * off
    drift = 0.0
    edge = max(abs(psi[0]), abs(psi[-1])) / scale
    snaps = {}
    pending = sorted(run.snapshots)
    log = [(run.t0, 0.0)]
    t = run.t0
    for i in range(steps):
        diag = 2.0 / dx ** 2 + np.asarray(run.potential(x, t + 0.5 * tau), float)
        lhs[1] = 1 + a * diag
        rhs = (1 - a * diag) * psi
        rhs[1:] -= a * off * psi[:-1]
        rhs[:-1] -= a * off * psi[1:]
        psi = solve_banded((1, 1), lhs, rhs, check_finite=False)
        t = run.t0 + (i + 1) * tau
        if n0 > 0:
            d = abs(_norm2(psi, dx) - n0) / n0
            drift = max(drift, d)
        edge = max(edge, max(abs(psi[0]), abs(psi[-1])) / scale)
        if check_leak and edge > run.leak_tol:
            raise BoxTooSmallError(
                f"boundary amplitude {edge:.3g} exceeds {run.leak_tol:g} at t={t:.6g}")
        while pending and t >= pending[0] - 0.5 * tau:
            snaps[pending.pop(0)] = psi.copy()
            log.append((t, drift))
    if steps == 0:
        for s in pending:
            snaps[s] = psi.copy()
    if log[-1][0] != t:
        log.append((t, drift))
    return PropagationResult(x, t, psi, drift, edge, steps, snaps, log)


def convergence_study(run: PropagationRun, refinements: int = 3):
    """Errors against ``run.exact`` for ``refinements`` simultaneous (h, tau) halvings.

    Returns ``(errors, ratios, monotone)``; ratios near 4 indicate second order.
    """
    if refinements < 2:
        raise DomainError("need at least two refinement levels")
    if run.exact is None:
        raise DomainError("convergence study needs an exact solution")
    errors = []
    level = run
    for _ in range(refinements):
        res = propagate(level)
        errors.append(res.l2(run.exact(res.x, res.t)))
        level = level.refined()
    ratios = [errors[i] / errors[i + 1] if errors[i + 1] > 0 else float("inf")
              for i in range(len(errors) - 1)]
    monotone = all(errors[i + 1] <= errors[i] for i in range(len(errors) - 1))
    return errors, ratios, monotone


def grid_derivative(f: np.ndarray, dx: float) -> np.ndarray:
    """Second-order first derivative on a uniform grid (one-sided at the ends)."""
    return np.gradient(f, dx, edge_order=2)
