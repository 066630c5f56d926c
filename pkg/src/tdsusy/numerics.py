"""Shared numerical substrate.

Everything downstream works with *jets*: arrays whose leading axis indexes
the order of the x-derivative, ``jet[k] = d^k f / dx^k``, evaluated on an
arbitrary (broadcast) set of space-time points.  Products, quotients and
logarithmic derivatives of jets are exact Leibniz-rule manipulations, so
x-derivatives never involve finite differences.  Only the time derivative
in :func:`fd_schrodinger_residual` is a finite difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import AccuracyError, CapabilityError, DomainError, SingularEvaluationError

# ---------------------------------------------------------------------------
# domains and grids


@dataclass(frozen=True)
class Interval:
    a: float = -math.inf
    b: float = math.inf

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"empty interval [{self.a}, {self.b}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return (x >= self.a) & (x <= self.b)

    def contains_open(self, x) -> np.ndarray:
        x = np.asarray(x)
        return (x > self.a) & (x < self.b)


REAL_LINE = Interval()
HALF_LINE = Interval(0.0, math.inf)


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    """Rectangular sampling of an x-range times a t-range."""

    x_nodes: np.ndarray
    t_nodes: np.ndarray
    domain: Interval = field(default=REAL_LINE)
    min_nodes: int = 5  # finite-difference stencils; exports may go down to 1

    def __post_init__(self):
        x = np.asarray(self.x_nodes, dtype=float)
        t = np.asarray(self.t_nodes, dtype=float)
        for name, arr in (("x", x), ("t", t)):
            if arr.ndim != 1 or arr.size < self.min_nodes:
                raise DomainError(f"{name} axis needs at least {self.min_nodes} nodes")
            if not np.all(np.diff(arr) > 0):
                raise DomainError(f"{name} nodes must be strictly increasing")
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} nodes must be finite")
        if not np.all(self.domain.contains(x)):
            raise DomainError("x nodes leave the domain interval")
        object.__setattr__(self, "x_nodes", x)
        object.__setattr__(self, "t_nodes", t)

    @classmethod
    def uniform(cls, x_range, t_range, domain=REAL_LINE, min_nodes=5) -> "SpaceTimeGrid":
        """Build from ``(a, b, n)`` triples (``n`` nodes, endpoints included)."""
        return cls(np.linspace(*x_range[:2], int(x_range[2])),
                   np.linspace(*t_range[:2], int(t_range[2])), domain, min_nodes)

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.x_nodes)))

    @property
    def tau(self) -> float:
        return float(np.max(np.diff(self.t_nodes)))

    @property
    def shape(self):
        return (self.t_nodes.size, self.x_nodes.size)

    def mesh(self):
        """``(X, T)`` broadcastable to ``shape`` (rows are times)."""
        return self.x_nodes[None, :], self.t_nodes[:, None]


# ---------------------------------------------------------------------------
# jet algebra


def jet_mul(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Derivatives of ``f*g`` up to the common order."""
    order = min(len(f), len(g)) - 1
    shape = np.broadcast_shapes(f.shape[1:], g.shape[1:])
    out = np.zeros((order + 1,) + shape, dtype=np.result_type(f, g))
    for m in range(order + 1):
        for j in range(m + 1):
            out[m] += math.comb(m, j) * f[j] * g[m - j]
    return out


def jet_div(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Derivatives of ``f/g``, from ``f = g q`` solved order by order."""
    order = min(len(f), len(g)) - 1
    shape = np.broadcast_shapes(f.shape[1:], g.shape[1:])
    q = np.zeros((order + 1,) + shape, dtype=np.result_type(f, g, float))
    for m in range(order + 1):
        acc = f[m] + 0 * g[0]
        for j in range(1, m + 1):
            acc = acc - math.comb(m, j) * g[j] * q[m - j]
        q[m] = acc / g[0]
    return q


def jet_log_derivative(f: np.ndarray) -> np.ndarray:
    """Jet of ``f'/f`` (one order shorter than ``f``)."""
    return jet_div(f[1:], f[:-1])


def jet_scale(f: np.ndarray, c) -> np.ndarray:
    """Multiply a jet by an x-independent factor ``c`` (broadcast)."""
    return f * np.asarray(c)[None, ...]


def zero_jet(order: int, shape) -> np.ndarray:
    return np.zeros((order + 1,) + tuple(shape), dtype=complex)


def _points(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return x, t, np.broadcast_shapes(x.shape, t.shape)


# ---------------------------------------------------------------------------
# differentiable fields


class Field:
    """A function of ``(x, t)`` whose x-derivatives are known exactly.

    Subclasses implement :meth:`_derivs`; ``derivs(x, t, k)`` returns an
    array of shape ``(k + 1,) + broadcast(x, t).shape``.
    """

    max_order: float = math.inf
    label: str = "field"

    def derivs(self, x, t, order: int) -> np.ndarray:
        if order > self.max_order:
            raise CapabilityError(
                f"{self.label}: derivative order {order} requested, "
                f"oracle provides {self.max_order}")
        x, t, shape = _points(x, t)
        return np.broadcast_to(self._derivs(x, t, order),
                               (order + 1,) + shape).astype(complex)

    def _derivs(self, x, t, order):
        raise NotImplementedError

    def value(self, x, t):
        return self.derivs(x, t, 0)[0]

    __call__ = value

    def dx(self, k: int, x, t):
        return self.derivs(x, t, k)[k]

    # linear combinations stay lazily differentiable
    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __rmul__(self, c):
        return LinearCombination([(c, self)])

    def __neg__(self):
        return LinearCombination([(-1.0, self)])


class ZeroField(Field):
    label = "zero"

    def _derivs(self, x, t, order):
        return zero_jet(order, np.broadcast_shapes(x.shape, t.shape))


class LinearCombination(Field):
    def __init__(self, terms):
        self.terms = [(c, f) for c, f in terms if not isinstance(f, ZeroField)]
        self.max_order = min((f.max_order for _, f in self.terms), default=math.inf)
        self.label = " + ".join(f"{c}*{f.label}" for c, f in self.terms) or "zero"

    def _derivs(self, x, t, order):
        out = zero_jet(order, np.broadcast_shapes(x.shape, t.shape))
        for c, f in self.terms:
            out = out + c * f.derivs(x, t, order)
        return out


class JetField(Field):
    """Field defined by a function returning jets, ``fn(x, t, order)``."""

    def __init__(self, fn, label="field", max_order=math.inf):
        self._fn = fn
        self.label = label
        self.max_order = max_order

    def _derivs(self, x, t, order):
        return self._fn(x, t, order)


class PotentialField:
    """Real potential energy ``U(x, t)``; the Hamiltonian is ``-d2/dx2 + U``.

    ``jet(x, t, k)`` must return the exact x-derivatives up to ``k``.
    """

    def __init__(self, jet: Callable, label: str, domain: Interval = REAL_LINE,
                 stationary: bool = False):
        self._jet = jet
        self.label = label
        self.domain = domain
        self.stationary = stationary

    def derivs(self, x, t, order: int) -> np.ndarray:
        x, t, shape = _points(x, t)
        return np.broadcast_to(self._jet(x, t, order), (order + 1,) + shape)

    def __call__(self, x, t):
        return self.derivs(x, t, 0)[0]

    def __repr__(self):
        return f"PotentialField({self.label!r})"


def free_potential() -> PotentialField:
    return PotentialField(lambda x, t, k: np.zeros((k + 1,) + np.broadcast_shapes(x.shape, t.shape)),
                          "free", stationary=True)


def harmonic_potential(omega: float) -> PotentialField:
    if omega <= 0:
        raise DomainError("oscillator frequency must be positive")
    w2 = omega * omega

    def jet(x, t, k):
        shape = np.broadcast_shapes(x.shape, t.shape)
        out = np.zeros((k + 1,) + shape)
        xb = np.broadcast_to(x, shape)
        out[0] = w2 * xb * xb
        if k >= 1:
            out[1] = 2 * w2 * xb
        if k >= 2:
            out[2] = 2 * w2
        return out

    pot = PotentialField(jet, f"oscillator(omega={omega:g})", stationary=True)
    pot.omega = omega
    return pot


class SolutionOracle(Field):
    """A solution of ``i psi_t = -psi_xx + U psi`` with exact x-derivatives.

    ``constant`` is the eigenvalue ``C`` of the seed under the stationary
    Hamiltonian when one exists; ``node_count`` the number of real zeros in
    x (``None`` if not tracked).
    """

    potential: PotentialField
    constant: float | None = None
    node_count: int | None = None
    square_integrable: bool | None = None

    def dt(self, x, t):
        """Time derivative taken from the evolution equation itself."""
        d = self.derivs(x, t, 2)
        return -1j * (-d[2] + self.potential(x, t) * d[0])


# ---------------------------------------------------------------------------
# Wronskians


def _compositions(m: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``m``."""
    for bars in combinations(range(m + parts - 1), parts - 1):
        prev = -1
        comp = []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(m + parts - 1 - prev - 1)
        yield tuple(comp)


def _multinomial(m, comp):
    out = math.factorial(m)
    for c in comp:
        out //= math.factorial(c)
    return out


def _stack_derivs(fns, x, t, need):
    # D[k, ..., j] = k-th derivative of fns[j]
    return np.stack([f.derivs(x, t, need) for f in fns], axis=-1)


def wronskian_jet(fns, x, t, order: int = 0, *, return_scale: bool = False):
    """x-derivatives of the Wronskian ``W(f_1, ..., f_n)`` up to ``order``.

    The m-th derivative is the multinomial sum over ways of distributing m
    extra derivatives among the rows; determinants with repeated rows drop
    out.  With ``return_scale`` the log of the Hadamard bound (product of
    column norms) is returned as well, giving a natural size for ``|W|``.
    """
    fns = list(fns)
    n = len(fns)
    if n == 0:
        raise DomainError("Wronskian of an empty list")
    x, t, shape = _points(x, t)
    D = _stack_derivs(fns, x, t, n - 1 + order)
    out = np.zeros((order + 1,) + shape, dtype=complex)
    for m in range(order + 1):
        for comp in _compositions(m, n):
            rows = [i + comp[i] for i in range(n)]
            if len(set(rows)) < n:
                continue
            mat = np.moveaxis(D[rows], 0, -2)
            out[m] += _multinomial(m, comp) * np.linalg.det(mat)
    if return_scale:
        # log of the product of column norms, safe against overflow
        mag = np.abs(D[:n])
        peak = np.max(mag, axis=0)
        safe = np.where(peak > 0, peak, 1.0)
        norms = safe * np.sqrt(np.sum((mag / safe) ** 2, axis=0))
        with np.errstate(divide="ignore"):
            log_scale = np.sum(np.log(np.where(peak > 0, norms, 0.0)), axis=-1)
        return out, log_scale
    return out


def wronskian(fns, x, t):
    """Wronskian determinant from exact oracle derivatives."""
    return wronskian_jet(fns, x, t, 0)[0]


# ---------------------------------------------------------------------------
# finite-difference residual of the Schrodinger equation


def fd_schrodinger_residual(psi: Field, U: PotentialField, grid: SpaceTimeGrid,
                            *, relative: bool = True) -> float:
    """Max over interior time nodes of ``|i psi_t - (-psi_xx + U psi)|``.

    ``psi_t`` is the second-order central difference on the grid's time
    nodes; ``psi_xx`` is exact.  With ``relative`` (default) the result is
    divided by ``max |psi|`` on the grid, which makes it independent of the
    arbitrary normalisation of the solution.
    """
    if psi.max_order < 2:
        raise CapabilityError(f"{psi.label}: residual needs second x-derivatives")
    X, T = grid.mesh()
    Uv = U(X, T[1:-1])
    if not np.all(np.isfinite(Uv)):
        bad = np.argwhere(~np.isfinite(Uv))
        locs = [(float(grid.x_nodes[j]), float(grid.t_nodes[i + 1])) for i, j in bad[:10]]
        raise SingularEvaluationError(f"potential {U.label} singular on grid", locs)
    vals = psi.derivs(X, T, 0)[0]
    d2 = psi.derivs(X, T[1:-1], 2)[2]
    dt = (grid.t_nodes[2:] - grid.t_nodes[:-2])[:, None]
    psi_t = (vals[2:] - vals[:-2]) / dt
    res = np.abs(1j * psi_t - (-d2 + Uv * vals[1:-1]))
    if not np.all(np.isfinite(res)):
        raise SingularEvaluationError(f"{psi.label}: non-finite residual on grid")
    peak = float(np.max(res)) if res.size else 0.0
    if relative:
        norm = float(np.max(np.abs(vals)))
        return peak / norm if norm > 0 else 0.0
    return peak


def convergence_ratio(residual_at: Callable[[float], float], tau: float) -> float:
    """``residual(tau) / residual(tau/2)``; about 4 for a second-order scheme."""
    coarse = residual_at(tau)
    fine = residual_at(tau / 2)
    return coarse / fine if fine > 0 else math.inf


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature (vectorised over intervals)

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])           # 15 nodes, ascending
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]


def _to_s(y):
    """Inverse of ``y = s / (1 - s^2)`` on ``(-1, 1)``."""
    if math.isinf(y):
        return math.copysign(1.0, y)
    if y == 0:
        return 0.0
    return (-1.0 + math.sqrt(1.0 + 4.0 * y * y)) / (2.0 * y)


def _mapped(f, cutoff):
    def g(s):
        den = 1.0 - s * s
        y = s / den
        jac = (1.0 + s * s) / (den * den)
        out = np.zeros(s.shape, dtype=complex)
        keep = np.ones(s.shape, bool) if cutoff is None else np.abs(y) <= cutoff
        if np.any(keep):
            out[keep] = np.asarray(f(y[keep]), dtype=complex) * jac[keep]
        return out
    return g


def _gk_segments(g, lo, hi, tols, max_rounds=60):
    """Integrate ``g`` over each ``[lo_i, hi_i]`` to absolute ``tols_i``."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    owner = np.arange(lo.size)
    budget = np.asarray(tols, float) / np.maximum(hi - lo, 1e-300)  # error per unit length
    totals = np.zeros(lo.size, dtype=complex)
    errors = np.zeros(lo.size)
    for _ in range(max_rounds):
        if lo.size == 0:
            return totals, errors
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        pts = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = np.asarray(g(pts.ravel()), dtype=complex).reshape(pts.shape)
        if not np.all(np.isfinite(vals)):
            raise AccuracyError("integrand is not finite on the integration range")
        kron = half * (vals @ _KW)
        gauss = half * (vals @ _GW)
        err = np.abs(kron - gauss)
        # round-off floor: the estimate cannot fall below a few ulps of sum |f| w
        floor = 50 * np.finfo(float).eps * half * (np.abs(vals) @ _KW)
        ok = (err <= budget[owner] * (hi - lo)) | (err <= floor)
        np.add.at(totals, owner[ok], kron[ok])
        np.add.at(errors, owner[ok], err[ok])
        bad = ~ok
        lo, hi, mid, owner = lo[bad], hi[bad], mid[bad], owner[bad]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        owner = np.concatenate([owner, owner])
        if lo.size > 200000:
            break
    raise AccuracyError("adaptive quadrature did not converge within its budget")


def cumulative_quadrature(f, a: float, xs, tol: float = 1e-10, *, cutoff=None):
    """``[int_a^{x_i} f(y) dy for x_i in xs]`` with total error at most ``tol``.

    ``f`` is vectorised and may be complex.  If ``a`` is ``-inf`` the range is
    mapped to a finite one through ``y = s/(1-s^2)``; ``cutoff`` declares the
    integrand negligible for ``|y| > cutoff`` (nodes there are not evaluated,
    which protects oracles that overflow far out).
    """
    xs = np.asarray(xs, float)
    flat = xs.ravel()
    if flat.size == 0:
        return np.zeros(xs.shape, complex)
    order = np.argsort(flat, kind="stable")
    sx = flat[order]
    if np.any(sx < a):
        raise DomainError("upper limit below the lower limit")
    infinite = math.isinf(a) or math.isinf(sx[-1])
    if infinite:
        g = _mapped(f, cutoff)
        ends = np.array([_to_s(a)] + [_to_s(v) for v in sx])
    else:
        g = lambda y: np.asarray(f(y), complex)  # noqa: E731
        ends = np.concatenate([[a], sx])
    lo, hi = ends[:-1], ends[1:]
    nonempty = hi > lo
    seg = np.zeros(lo.size, complex)
    if np.any(nonempty):
        tols = np.full(int(nonempty.sum()), tol / max(int(nonempty.sum()), 1))
        seg[nonempty], _ = _gk_segments(g, lo[nonempty], hi[nonempty], tols)
    out = np.empty(flat.size, complex)
    out[order] = np.cumsum(seg)
    return out.reshape(xs.shape)


def quadrature(f, a: float, x: float, tol: float = 1e-10, *, cutoff=None) -> complex:
    """Adaptive estimate of ``int_a^x f(y) dy`` with absolute error at most ``tol``.

    Either limit may be infinite (see :func:`cumulative_quadrature`).
    """
    if x == a:
        return 0j
    if x < a:
        return -quadrature(f, x, a, tol, cutoff=cutoff)
    if math.isinf(a) and math.isinf(x):
        s = _gk_segments(_mapped(f, cutoff), np.array([-1.0]), np.array([1.0]), np.array([tol]))[0]
        return complex(s[0])
    return complex(cumulative_quadrature(f, a, np.array([x]), tol, cutoff=cutoff)[0])
