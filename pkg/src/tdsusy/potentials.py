"""Closed-form time-dependent potentials obtained from free and oscillator seeds.

All functions take ``z = x / sqrt(1 + t^2)`` internally and return the
potential energy ``U`` (Hamiltonian ``-d2/dx2 + U``).  Two families also
carry a ``literal=True`` variant that differs from what the transformation
itself produces; the default evaluates the derived form:

* juxtaposed pair: prefactor ``-2 (1+t^2)^-1`` (literal ``-2 (1+t^2)``);
* anharmonic oscillator: ``sin^-2(2wt)`` (literal ``sin^-1/2(2wt)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .darboux import DarbouxChain
from .errors import DomainError, SingularEvaluationError
from .numerics import HALF_LINE, REAL_LINE, Interval
from .seeds import free_l2_state, free_particle_solution, oscillator_nonstationary_seed

MAX_INDEX = 6
MAX_L = 9


def _zt(x, t):
    x = np.asarray(x, float)
    t = np.asarray(t, float)
    return x / np.sqrt(1 + t * t), 1.0 / (1 + t * t)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def free_even(k, x, t):
    """Single transformation with the nodeless seed ``lambda = 2k + 1/2``."""
    k = int(k)
    if k < 0:
        raise DomainError("k must be non-negative")
    z, w = _zt(x, t)
    if k == 0:
        return _out(-w * np.ones_like(z))
    q = specfun.q_table(2 * k, z)
    r2, r1 = q[2 * k - 2] / q[2 * k], q[2 * k - 1] / q[2 * k]
    return _out(-w * (1 + 4 * k * (2 * k - 1) * r2 - 8 * k * k * r1 * r1))


def free_odd(k, x, t):
    """Single transformation with ``lambda = 2k + 3/2`` on the half-line ``x > 0``."""
    k = int(k)
    if k < 0:
        raise DomainError("k must be non-negative")
    z, w = _zt(x, t)
    if np.any(np.asarray(x) <= 0):
        raise DomainError("the odd family lives on x > 0 (the seed vanishes at x = 0)")
    q = specfun.q_table(2 * k + 1, z)
    num = q[2 * k - 1] if k >= 1 else 0.0
    r1, r0 = num / q[2 * k + 1], q[2 * k] / q[2 * k + 1]
    return _out(-w * (1 + 4 * k * (2 * k + 1) * r1 - 2 * (2 * k + 1) ** 2 * r0 * r0))


def free_juxtaposed(n, x, t, literal=False):
    """Double transformation with the neighbouring square-integrable seeds ``n, n+1``."""
    n = int(n)
    if n < 0:
        raise DomainError("n must be non-negative")
    z, w = _zt(x, t)
    J, dJ, d2J = (a[n] for a in specfun.j_table(n, z))
    bracket = d2J / J - (dJ / J) ** 2 - 1
    pref = (1 + np.asarray(t, float) ** 2) if literal else w
    return _out(-2 * pref * bracket)


def free_evenodd(m, l, x, t):
    """Double transformation with ``lambda = m + 1/2`` (m even) and ``l + 1/2`` (l odd)."""
    m, l = int(m), int(l)
    if m < 0 or m % 2 or l <= m or l % 2 == 0:
        raise DomainError(f"need m even >= 0 and l > m odd, got m={m}, l={l}")
    z, w = _zt(x, t)
    f = specfun.f_poly_derivs(m, l, z, 2)
    return _out(-2 * w * (1 + f[2] / f[0] - (f[1] / f[0]) ** 2))


def oscillator_anharmonic(lam, omega, x, t, literal=False):
    """``w^2 x^2 - 2 lam^2 sin^-2(2wt) sech^2(lam x / sin 2wt)``."""
    x = np.asarray(x, float)
    t = np.asarray(t, float)
    s = np.sin(2 * omega * t)
    if np.any(s <= 64 * np.finfo(float).eps):  # sin(pi) rounds to ~1e-16, not 0
        raise SingularEvaluationError("the anharmonic family needs sin(2 omega t) > 0")
    amp = s ** -0.5 if literal else s ** -2.0
    return _out(omega ** 2 * x * x - 2 * lam ** 2 * amp / np.cosh(lam * x / s) ** 2)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialFamily:
    """One member of a closed-form family plus the chain that generates it."""

    family: str
    params: dict = field(default_factory=dict)

    FAMILIES = ("free-even", "free-odd", "free-juxtaposed", "free-evenodd", "oscillator-anharmonic")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {self.FAMILIES}")
        p = self.params
        if self.family in ("free-even", "free-odd"):
            _need_index(p, "k")
        elif self.family == "free-juxtaposed":
            _need_index(p, "n")
        elif self.family == "free-evenodd":
            m, l = _need_index(p, "m"), int(p.get("l", -1))
            if m % 2 or l <= m or l % 2 == 0 or l > MAX_L:
                raise DomainError(f"need m even, l odd with m < l <= {MAX_L}, got m={m}, l={l}")
        else:
            if "lam" not in p:
                raise DomainError("oscillator-anharmonic needs lam")
            if float(p.get("omega", 1.0)) <= 0:
                raise DomainError("omega must be positive")

    @property
    def domain(self) -> Interval:
        return HALF_LINE if self.family == "free-odd" else REAL_LINE

    @property
    def omega(self) -> float:
        return float(self.params.get("omega", 1.0))

    def __call__(self, x, t, literal=False):
        p = self.params
        if self.family == "free-even":
            return free_even(p["k"], x, t)
        if self.family == "free-odd":
            return free_odd(p["k"], x, t)
        if self.family == "free-juxtaposed":
            return free_juxtaposed(p["n"], x, t, literal=literal)
        if self.family == "free-evenodd":
            return free_evenodd(p["m"], p["l"], x, t)
        return oscillator_anharmonic(float(p["lam"]), self.omega, x, t, literal=literal)

    def chain(self) -> DarbouxChain:
        """The transformation whose ``U_0 - (log|W|^2)_xx`` this family equals."""
        p = self.params
        if self.family == "free-even":
            return DarbouxChain([free_particle_solution(2 * p["k"] + 0.5)])
        if self.family == "free-odd":
            return DarbouxChain([free_particle_solution(2 * p["k"] + 1.5)], domain=HALF_LINE)
        if self.family == "free-juxtaposed":
            return DarbouxChain([free_l2_state(p["n"]), free_l2_state(p["n"] + 1)])
        if self.family == "free-evenodd":
            return DarbouxChain([free_particle_solution(p["m"] + 0.5),
                                 free_particle_solution(p["l"] + 0.5)])
        w = self.omega
        return DarbouxChain([oscillator_nonstationary_seed(float(p["lam"]), w)],
                            t_ref=math.pi / (4 * w))

    def background(self, x, t):
        """Large-|x| limit: the seed potential plus a spatially constant offset.

        The offset ``c / (1 + t^2)`` only shifts the phase of solutions.
        """
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        offset = {"free-even": -1.0, "free-odd": -1.0, "free-juxtaposed": 2.0,
                  "free-evenodd": -2.0}.get(self.family)
        if offset is None:
            return self.omega ** 2 * x * x + 0 * t
        return offset / (1 + t * t) + 0 * x


def _need_index(p, key):
    if key not in p:
        raise DomainError(f"missing parameter {key}")
    v = p[key]
    if int(v) != v or not 0 <= v <= MAX_INDEX:
        raise DomainError(f"{key} must be an integer in 0..{MAX_INDEX}, got {v}")
    return int(v)
