"""Time-dependent Darboux / Crum transformations.

A chain of seeds ``u_1..u_N`` (solutions of the same equation) defines

    L psi = L_N(t) W(u_1, ..., u_N, psi) / W(u_1, ..., u_N)
    U_N   = U_0 - (log |W(u_1, ..., u_N)|^2)_xx
    L_N   = exp(2 int_{t_ref}^t Im (log W)_xx dt')

``L`` also factors into first-order pieces ``(d/dx - w_j)`` with
``w_j = (log W_j / W_{j-1})_x``; the factorised form is what the adjoint
(stationary case only) is built from.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (CapabilityError, DegenerateChainError, DomainError, PoleError,
                     RealityViolationError)
from .numerics import (REAL_LINE, Field, Interval, JetField, PotentialField, SolutionOracle,
                       SpaceTimeGrid, jet_div, jet_log_derivative, jet_mul, wronskian_jet)
from .seeds import EnvelopeSolution

POLE_THRESHOLD = 1e-12
SPREAD_TOL = 1e-8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GAUGE_PIECE = 0.02


def _pole_check(W, log_scale, x, t, what):
    with np.errstate(divide="ignore"):
        bad = np.log(np.abs(W)) <= math.log(POLE_THRESHOLD) + log_scale
    if np.any(bad):
        xb, tb = np.broadcast_arrays(x, t)
        locs = sorted({(float(a), float(b)) for a, b in zip(xb[bad].ravel(), tb[bad].ravel())})
        raise PoleError(f"{what}: Wronskian vanishes at {len(locs)} point(s), "
                        f"first at x={locs[0][0]:.6g}, t={locs[0][1]:.6g}", locs)


class DarbouxChain:
    """Ordered seeds ``u_1..u_N`` attached to one seed potential."""

    def __init__(self, seeds, t_ref: float = 0.0, domain: Interval = REAL_LINE,
                 probe_x=(0.37, 0.81, 1.23), label: str | None = None):
        seeds = tuple(seeds)
        if not seeds:
            raise DegenerateChainError("a chain needs at least one seed")
        pot = seeds[0].potential
        if any(s.potential.label != pot.label for s in seeds):
            raise DegenerateChainError("all seeds must solve the same equation")
        self.seeds = seeds
        self.seed_potential = pot
        self.t_ref = float(t_ref)
        self.domain = domain
        self.probe_x = np.asarray(probe_x, dtype=float)
        self.label = label or "chain[" + ", ".join(s.label for s in seeds) + "]"
        self._gauge_cache = {}

    def __len__(self):
        return len(self.seeds)

    def __repr__(self):
        return f"DarbouxChain({self.label})"

    @property
    def constants(self):
        return tuple(s.constant for s in self.seeds)

    @property
    def stationary(self) -> bool:
        return self.seed_potential.stationary and all(c is not None for c in self.constants)

    # -- Wronskian and its logarithm -------------------------------------------------

    def wronskian_jet(self, x, t, order=0, *, check_poles=True):
        W, scale = wronskian_jet(self.seeds, x, t, order, return_scale=True)
        if check_poles:
            _pole_check(W[0], scale, x, t, self.label)
        return W

    def log_wronskian_jet(self, x, t, order):
        """Jet of ``(log W)_x`` up to ``order``.

        When every seed carries the same envelope ``exp(a x^2 + b x)`` it is
        factored out, ``W = e^{N(a x^2 + b x)} W(g_1..g_N)``; the shape
        Wronskian then has a constant phase, so ``Im (log W)_x`` stays exact
        next to real zeros of ``W`` instead of degrading like ``eps / d^k``.
        """
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        env = self._shared_envelope(t)
        if env is None:
            return jet_log_derivative(self.wronskian_jet(x, t, order + 1))
        a, b = env
        shapes = [JetField(lambda xx, tt, k, s=s: s.shape_derivs(xx, tt, k), s.label)
                  for s in self.seeds]
        Wg, scale = wronskian_jet(shapes, x, t, order + 1, return_scale=True)
        _pole_check(Wg[0], scale, x, t, self.label)
        lw = jet_log_derivative(Wg)
        N = len(self)
        lw[0] += N * (2 * a * x + b)
        if order >= 1:
            lw[1] += 2 * N * a
        return lw

    def _shared_envelope(self, t):
        if not all(isinstance(s, EnvelopeSolution) for s in self.seeds):
            return None
        a0, b0 = self.seeds[0].envelope(t)
        for s in self.seeds[1:]:
            a, b = s.envelope(t)
            if not (np.array_equal(a, a0) and np.array_equal(b, b0)):
                return None
        return a0, b0

    # -- gauge factor ----------------------------------------------------------------

    def gauge_rate(self, t):
        """``Im (log W)_xx`` at the probe points; must not depend on x."""
        t = np.asarray(t, dtype=float)
        lw = self.log_wronskian_jet(self.probe_x.reshape((-1,) + (1,) * t.ndim), t, 1)
        rate = lw[1].imag
        spread = rate.max(axis=0) - rate.min(axis=0)
        if np.any(spread > SPREAD_TOL):
            raise RealityViolationError(
                f"{self.label}: Im(log W)_xx varies with x by {float(spread.max()):.3g}")
        return rate.mean(axis=0)

    def gauge(self, t):
        """Positive factor ``L_N(t)``, normalised to 1 at ``t_ref``."""
        t = np.asarray(t, dtype=float)
        key = t.tobytes() + bytes(str(t.shape), "ascii")
        hit = self._gauge_cache.get(key)
        if hit is not None:
            return hit
        flat = t.ravel()
        knots = np.unique(np.concatenate([flat, [self.t_ref]]))
        gaps = np.diff(knots)
        pieces = np.maximum(np.ceil(gaps / _GAUGE_PIECE), 1).astype(int)
        # sub-interval endpoints for every gap, integrated with 8-point Gauss-Legendre
        lefts = np.concatenate([knots[i] + gaps[i] * np.arange(p) / p for i, p in enumerate(pieces)]) \
            if gaps.size else np.zeros(0)
        widths = np.repeat(gaps / pieces, pieces) if gaps.size else np.zeros(0)
        nodes = lefts[:, None] + 0.5 * widths[:, None] * (_GL_NODES[None, :] + 1)
        rates = self.gauge_rate(nodes) if nodes.size else np.zeros((0, 8))
        piece_int = 0.5 * widths * (rates @ _GL_WEIGHTS)
        gap_int = np.add.reduceat(piece_int, np.concatenate([[0], np.cumsum(pieces)[:-1]])) \
            if gaps.size else np.zeros(0)
        cum = np.concatenate([[0.0], np.cumsum(gap_int)])
        cum -= cum[np.searchsorted(knots, self.t_ref)]
        out = np.exp(2 * cum[np.searchsorted(knots, flat)]).reshape(t.shape)
        if len(self._gauge_cache) > 64:
            self._gauge_cache.clear()
        self._gauge_cache[key] = out
        return out

    # -- transformed objects ---------------------------------------------------------

    def transformed_potential(self) -> "TransformedPotential":
        return TransformedPotential(self)

    def transform(self, psi: Field) -> "TransformedSolution":
        """``L psi`` as a lazily evaluated oracle attached to ``U_N``."""
        return TransformedSolution(self, psi)

    def factor_jet(self, j, x, t, order):
        """Jet of ``w_j = (log W_j)_x - (log W_{j-1})_x`` (``j`` is 1-based)."""
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        hi = jet_log_derivative(wronskian_jet(self.seeds[:j], x, t, order + 1))
        if j == 1:
            return hi
        return hi - jet_log_derivative(wronskian_jet(self.seeds[:j - 1], x, t, order + 1))

    def apply_factorized(self, field: Field) -> Field:
        """``L field`` through the product of first-order factors."""
        out = field
        for j in range(1, len(self) + 1):
            out = _first_order(self, j, out, adjoint=False)
        return _gauged(self, out)

    def adjoint(self, field: Field) -> Field:
        """``L^+ field`` as ``L_N (-d - w_1*) ... (-d - w_N*)``; stationary chains only."""
        if not self.stationary:
            raise CapabilityError(
                "the adjoint is only defined here for stationary chains with known constants")
        out = field
        for j in range(len(self), 0, -1):
            out = _first_order(self, j, out, adjoint=True)
        return _gauged(self, out)


def _first_order(chain, j, field, adjoint):
    def fn(x, t, order):
        f = field.derivs(x, t, order + 1)
        w = chain.factor_jet(j, x, t, order)
        if adjoint:
            return -f[1:] - jet_mul(np.conj(w), f[:-1])
        return f[1:] - jet_mul(w, f[:-1])
    name = "A+" if adjoint else "A"
    return JetField(fn, f"{name}{j}({field.label})", field.max_order - 1)


def _gauged(chain, field):
    def fn(x, t, order):
        return field.derivs(x, t, order) * chain.gauge(np.broadcast_to(t, np.broadcast_shapes(
            np.shape(x), np.shape(t))))[None, ...]
    return JetField(fn, field.label, field.max_order)


class TransformedPotential(PotentialField):
    """``U_N = U_0 - 2 Re (log W)_xx`` with exact x-derivatives."""

    def __init__(self, chain: DarbouxChain):
        self.chain = chain

        def jet(x, t, k):
            lw = chain.log_wronskian_jet(x, t, k + 1)
            return chain.seed_potential.derivs(x, t, k) - 2 * lw[1:].real

        super().__init__(jet, f"U[{chain.label}]", chain.domain, stationary=chain.stationary)


class TransformedSolution(SolutionOracle):
    """``L_N(t) W(u_1..u_N, psi) / W(u_1..u_N)``."""

    def __init__(self, chain: DarbouxChain, psi: Field):
        self.chain = chain
        self.psi = psi
        self.potential = TransformedPotential(chain)
        self.max_order = psi.max_order - len(chain)
        if chain.stationary and getattr(psi, "constant", None) is not None:
            self.constant = psi.constant
        self.label = f"L[{psi.label}]"

    def _derivs(self, x, t, order):
        N = len(self.chain)
        for s in self.chain.seeds:
            if s.max_order < N + order:
                raise CapabilityError(f"{s.label} lacks derivative order {N + order}")
        if self.psi.max_order < N + order:
            raise CapabilityError(f"{self.psi.label} lacks derivative order {N + order}")
        num = wronskian_jet(self.chain.seeds + (self.psi,), x, t, order)
        den = self.chain.wronskian_jet(x, t, order)
        q = jet_div(num, den)
        g = self.chain.gauge(np.broadcast_to(t, q.shape[1:]))
        return q * g[None, ...]


# ---------------------------------------------------------------------------
# module-level operations


def log_deriv(u: Field, x, t, order: int):
    """Exact ``d^order/dx^order log u`` for ``order`` in 1..3."""
    if order not in (1, 2, 3):
        raise DomainError("log_deriv supports orders 1 to 3")
    if u.max_order < order:
        raise CapabilityError(f"{u.label} lacks derivative order {order}")
    d = u.derivs(x, t, order)
    bad = np.abs(d[0]) < 1e-300
    if np.any(bad):
        xb, tb = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        raise PoleError(f"{u.label} vanishes", list(zip(xb[bad].ravel(), tb[bad].ravel()))[:10])
    return jet_log_derivative(d)[order - 1]


def reality_residual(chain: DarbouxChain, grid: SpaceTimeGrid) -> float:
    """``max |Im (log W)_xxx|`` over the grid (zero when the phase of W is quadratic in x)."""
    X, T = grid.mesh()
    lw = chain.log_wronskian_jet(X, T, 2)
    return float(np.max(np.abs(lw[2].imag)))


def gauge_factor(chain: DarbouxChain, t):
    out = chain.gauge(t)
    return float(out) if np.ndim(out) == 0 else out


def transformed_potential(chain: DarbouxChain, x, t):
    out = chain.transformed_potential()(x, t)
    return float(out) if np.ndim(out) == 0 else out


def apply_chain(chain: DarbouxChain, psi: Field, x, t):
    out = chain.transform(psi).value(x, t)
    return complex(out) if np.ndim(out) == 0 else out


def krein_admissible(indices) -> bool:
    """True iff ``prod_i (k - k_i) >= 0`` for every integer ``k >= 0``."""
    idx = [int(k) for k in indices]
    if len(set(idx)) != len(idx):
        raise DomainError(f"duplicate indices {indices}")
    if any(k < 0 for k in idx):
        raise DomainError("indices must be non-negative")
    return all(math.prod(k - ki for ki in idx) >= 0 for k in range(max(idx, default=0) + 1))


def real_normalized_wronskian(chain: DarbouxChain, x, t):
    """``W`` with its quadratic phase removed, so that it is real up to round-off.

    The phase is reconstructed from ``Im (log W)_x`` and ``Im (log W)_xx`` at the
    point of largest ``|W|`` on the supplied x nodes.
    """
    x = np.asarray(x, float)
    W = chain.wronskian_jet(x, t, 0, check_poles=False)[0]
    i0 = int(np.argmax(np.abs(W)))
    x0 = x[i0]
    lw = chain.log_wronskian_jet(np.array([x0]), t, 1)
    beta, kappa = lw[0, 0].imag, lw[1, 0].imag
    theta = np.angle(W[i0]) + beta * (x - x0) + 0.5 * kappa * (x - x0) ** 2
    return W * np.exp(-1j * theta)


def wronskian_sign_changes(chain: DarbouxChain, grid: SpaceTimeGrid):
    """Approximate ``(x, t)`` of every sign change of the real-normalised Wronskian."""
    locs = []
    for t in grid.t_nodes:
        R = real_normalized_wronskian(chain, grid.x_nodes, t)
        peak = np.max(np.abs(R))
        if np.max(np.abs(R.imag)) > 1e-6 * peak:
            raise RealityViolationError(f"{chain.label}: Wronskian phase is not quadratic in x")
        keep = np.abs(R.real) > 1e-14 * peak
        xs, signs = grid.x_nodes[keep], np.sign(R.real[keep])
        flips = np.nonzero(np.diff(signs))[0]
        locs += [(float(0.5 * (xs[i] + xs[i + 1])), float(t)) for i in flips]
    return locs


def wronskian_sign_scan(chain: DarbouxChain, grid: SpaceTimeGrid) -> int:
    """Largest number of sign changes of the real-normalised Wronskian along x."""
    per_t = {}
    for _, t in wronskian_sign_changes(chain, grid):
        per_t[t] = per_t.get(t, 0) + 1
    return max(per_t.values(), default=0)


def apply_hamiltonian(U: PotentialField, field: Field, shift: float = 0.0) -> Field:
    """``(-d2/dx2 + U - shift) field`` with exact derivatives."""
    def fn(x, t, order):
        f = field.derivs(x, t, order + 2)
        u = U.derivs(x, t, order)
        return -f[2:] + jet_mul(u, f[:-2]) - shift * f[:-2]
    return JetField(fn, f"(H-{shift:g})({field.label})", field.max_order - 2)


def factorization_residual(chain: DarbouxChain, test_states, grid: SpaceTimeGrid,
                           *, sides=("LdagL", "LLdag")) -> float:
    """Max residual of ``L^+L = prod(h0 - C_i)`` and ``LL^+ = prod(h1 - C_i)``.

    ``L^+L`` is checked on the test states, ``LL^+`` on their images ``L psi``.
    Both Hamiltonians act through exact derivatives.
    """
    if not chain.seed_potential.stationary:
        raise CapabilityError("factorization is checked for stationary seed potentials only")
    if any(c is None for c in chain.constants):
        raise CapabilityError("every seed needs a known constant C_i")
    X, T = grid.mesh()
    U1 = chain.transformed_potential()
    worst = 0.0
    for psi in test_states:
        if "LdagL" in sides:
            lhs = chain.adjoint(chain.apply_factorized(psi))
            rhs = psi
            for c in chain.constants:
                rhs = apply_hamiltonian(chain.seed_potential, rhs, c)
            worst = max(worst, float(np.max(np.abs(lhs.value(X, T) - rhs.value(X, T)))))
        if "LLdag" in sides:
            phi = chain.apply_factorized(psi)
            lhs = chain.apply_factorized(chain.adjoint(phi))
            rhs = phi
            for c in chain.constants:
                rhs = apply_hamiltonian(U1, rhs, c)
            worst = max(worst, float(np.max(np.abs(lhs.value(X, T) - rhs.value(X, T)))))
    return worst
