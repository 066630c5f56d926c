"""Two-component supersymmetric structure built on a Darboux chain.

States are pairs ``(upper, lower)`` of lazily differentiable fields.  The
operators here are plain functions ``SuperState -> SuperState``:

    Q   (psi, chi) = (0, L psi)           Q^+ (psi, chi) = (L^+ chi, 0)
    P_0 (psi, chi) = (0, L psi)           Q_g (psi, chi) = (g M chi, 0)
    G_g (psi, chi) = (g psi, L g M chi)

``M`` is the integral operator inverting ``L`` on its image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .darboux import DarbouxChain
from .errors import CapabilityError, DegenerateChainError, DomainError, SingularEvaluationError
from .numerics import (Field, JetField, SolutionOracle, SpaceTimeGrid, ZeroField,
                       cumulative_quadrature, fd_schrodinger_residual, jet_div, jet_mul,
                       quadrature)

ZERO = ZeroField()

E_PLUS = np.array([1, 0])
E_MINUS = np.array([0, 1])
SIGMA_MINUS = np.array([[0, 0], [1, 0]])
SIGMA_PLUS = np.array([[0, 1], [0, 0]])


@dataclass(frozen=True)
class SuperState:
    upper: Field
    lower: Field
    chain: DarbouxChain

    def __add__(self, other: "SuperState") -> "SuperState":
        return SuperState(_add(self.upper, other.upper), _add(self.lower, other.lower), self.chain)

    def __sub__(self, other: "SuperState") -> "SuperState":
        return self + SuperState(_neg(other.upper), _neg(other.lower), other.chain)

    def values(self, x, t):
        """Both components evaluated at ``(x, t)``, stacked on axis 0."""
        return np.stack([self.upper.value(x, t), self.lower.value(x, t)])

    @classmethod
    def paired(cls, chain: DarbouxChain, psi: Field) -> "SuperState":
        """``(psi, L psi)``: the state the supersymmetric equation propagates."""
        return cls(psi, chain.transform(psi), chain)


def _add(a, b):
    if isinstance(a, ZeroField):
        return b
    if isinstance(b, ZeroField):
        return a
    return a + b


def _neg(a):
    return a if isinstance(a, ZeroField) else -a


def _apply_L(chain, f):
    return ZERO if isinstance(f, ZeroField) else chain.transform(f)


def _apply_Ldag(chain, f):
    return ZERO if isinstance(f, ZeroField) else chain.adjoint(f)


def supercharge_apply(direction: str, state: SuperState) -> SuperState:
    """Apply ``Q`` or ``Q^+`` (the latter needs a stationary chain)."""
    chain = state.chain
    if direction == "Q":
        return SuperState(ZERO, _apply_L(chain, state.upper), chain)
    if direction in ("Q+", "Qdag"):
        if not chain.stationary:
            raise CapabilityError("Q^+ is only available for stationary chains")
        return SuperState(_apply_Ldag(chain, state.lower), ZERO, chain)
    raise DomainError(f"unknown supercharge {direction!r}")


def anticommutator(A, B):
    """``{A, B}`` for state maps."""
    return lambda s: A(B(s)) + B(A(s))


def super_symmetry_operator(state: SuperState) -> SuperState:
    """``S = diag(L^+L, LL^+)`` applied directly."""
    chain = state.chain
    return SuperState(_apply_Ldag(chain, _apply_L(chain, state.upper)),
                      _apply_L(chain, _apply_Ldag(chain, state.lower)), chain)


def super_residual(state: SuperState, grid: SpaceTimeGrid) -> float:
    """Largest component residual of ``(i d_t - diag(H_0, H_1)) Psi = 0``."""
    chain = state.chain
    worst = 0.0
    for comp, pot in ((state.upper, chain.seed_potential),
                      (state.lower, chain.transformed_potential())):
        if isinstance(comp, ZeroField):
            continue
        if isinstance(comp, SolutionOracle) and comp.potential.label != pot.label:
            raise DomainError(f"{comp.label} does not solve the {pot.label} equation")
        worst = max(worst, fd_schrodinger_residual(comp, pot, grid))
    return worst


# ---------------------------------------------------------------------------
# the inverse operator


class InverseOperator:
    """``M phi = [L_1 v*]^{-1} int_a^x v* phi dy`` with ``v = 1 / (L_1 u*)``.

    ``decay_length`` declares the integrand negligible beyond ``|y|`` of that
    size when the lower limit is infinite.
    """

    def __init__(self, chain: DarbouxChain, a: float | None = None,
                 tol: float = 1e-13, decay_length: float = 25.0):
        if len(chain) != 1:
            raise DegenerateChainError("the inverse operator is built for first-order chains")
        self.chain = chain
        self.u = chain.seeds[0]
        self.a = chain.domain.a if a is None else a
        self.tol = tol
        self.decay_length = decay_length

    def v_conj_jet(self, x, t, order):
        """Jet of ``v* = 1 / (L_1 u)``."""
        gu = self.u.derivs(x, t, order) * self.chain.gauge(np.broadcast_to(t, np.broadcast_shapes(
            np.shape(x), np.shape(t))))[None, ...]
        if np.any(np.abs(gu[0]) == 0):
            raise SingularEvaluationError(f"{self.u.label} vanishes; v is singular")
        one = np.zeros_like(gu)
        one[0] = 1.0
        return jet_div(one, gu)

    def phi0(self) -> Field:
        """``v = phi_0 = [L_1 u*]^{-1}``, the direction missing from the image of ``L``."""
        return JetField(lambda x, t, k: np.conj(self.v_conj_jet(x, t, k)),
                        f"phi0[{self.u.label}]", self.u.max_order)

    def integral(self, phi: Field, x, t):
        """``int_a^x v* phi dy`` on broadcast ``(x, t)``."""
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        out = np.zeros(x.shape, complex)
        for tv in np.unique(t):
            sel = t == tv

            def integrand(y, tv=tv):
                return self.v_conj_jet(y, tv, 0)[0] * phi.value(y, tv)
            out[sel] = cumulative_quadrature(integrand, self.a, x[sel], self.tol,
                                             cutoff=self.decay_length)
        return out

    def apply(self, phi: Field) -> Field:
        if isinstance(phi, ZeroField):
            return ZERO

        def fn(x, t, order):
            x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
            F = np.empty((order + 1,) + x.shape, complex)
            F[0] = self.integral(phi, x, t)
            if order:
                F[1:] = jet_mul(self.v_conj_jet(x, t, order - 1), phi.derivs(x, t, order - 1))
            gv = self.v_conj_jet(x, t, order) * self.chain.gauge(t)[None, ...]
            return jet_div(F, gv)

        return JetField(fn, f"M[{phi.label}]", phi.max_order + 1)

    def __call__(self, phi: Field) -> Field:
        return self.apply(phi)


def inverse_apply(M: InverseOperator, phi: Field, x, t):
    out = M.apply(phi).value(x, t)
    return complex(out) if np.ndim(out) == 0 else out


def inverse_square_integrable(u: Field, t: float, scale: float = 10.0, rtol: float = 1e-6,
                              doublings: int = 6) -> bool:
    """Numerical check that ``|1/u(., t)|^2`` is integrable on the line.

    The truncated integral over ``[-X, X]`` must become finite and stable
    (relative change below ``rtol``) as ``X`` doubles from ``scale``.
    """
    def f(y):
        with np.errstate(all="ignore"):
            return 1.0 / np.abs(u.value(y, t)) ** 2
    X = scale
    try:
        prev = quadrature(f, -X, X, 1e-10).real
        for _ in range(doublings):
            X *= 2
            cur = quadrature(f, -X, X, 1e-10).real
            if not np.isfinite(cur):
                return False
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
                return True
            prev = cur
    except Exception:
        return False
    return False


# ---------------------------------------------------------------------------
# symmetry generators and the single-generator anticommutator


def identity_symmetry(f: Field) -> Field:
    return f


def hamiltonian_symmetry(chain: DarbouxChain):
    """``h = L^+ L + alpha`` for a stationary first-order chain (``alpha = C``)."""
    if not chain.stationary or len(chain) != 1:
        raise CapabilityError("h = L^+L + alpha needs a stationary first-order chain")
    alpha = chain.constants[0]

    def g(f):
        if isinstance(f, ZeroField):
            return ZERO
        return chain.adjoint(chain.transform(f)) + alpha * f
    return g


def P0(state: SuperState) -> SuperState:
    return SuperState(ZERO, _apply_L(state.chain, state.upper), state.chain)


def Q_g(g, M: InverseOperator):
    def op(state):
        lower = state.lower
        up = ZERO if isinstance(lower, ZeroField) else g(M.apply(lower))
        return SuperState(up, ZERO, state.chain)
    return op


def G_g(g, M: InverseOperator):
    def op(state):
        chain = state.chain
        low = state.lower
        lower = ZERO if isinstance(low, ZeroField) else _apply_L(chain, g(M.apply(low)))
        return SuperState(g(state.upper), lower, chain)
    return op


def anticommutator_check(g, chain: DarbouxChain, test_states, grid: SpaceTimeGrid,
                         M: InverseOperator | None = None) -> float:
    """Max over test states of ``|({P_0, Q_g} - G_g) Psi|`` relative to ``max |G_g Psi|``.

    Each test state is ``(psi_i, L psi_{i+1})`` so both components are populated.
    """
    M = M or InverseOperator(chain)
    lhs_op = anticommutator(P0, Q_g(g, M))
    rhs_op = G_g(g, M)
    X, T = grid.mesh()
    states = list(test_states)
    worst = 0.0
    for i, psi in enumerate(states):
        Psi = SuperState(psi, chain.transform(states[(i + 1) % len(states)]), chain)
        lhs = lhs_op(Psi).values(X, T)
        rhs = rhs_op(Psi).values(X, T)
        scale = max(float(np.max(np.abs(rhs))), 1e-300)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    return worst


def image_overlap(M: InverseOperator, phi: Field, t: float) -> float:
    """Normalised ``|<phi_0, phi>|``; zero when ``phi`` lies in the image of ``L``."""
    v = M.phi0()
    cut = M.decay_length

    def ip(f, g):
        return quadrature(lambda y: np.conj(f.value(y, t)) * g.value(y, t),
                          -math.inf, math.inf, 1e-13, cutoff=cut)
    return abs(ip(v, phi)) / math.sqrt(ip(v, v).real * ip(phi, phi).real)


def truncated_norm(f: Field, t: float, X: float) -> float:
    """``(int_{-X}^{X} |f|^2 dx)^(1/2)``."""
    return math.sqrt(quadrature(lambda y: np.abs(f.value(y, t)) ** 2, -X, X, 1e-12).real)
