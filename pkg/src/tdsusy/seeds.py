"""Catalog of exact solutions used as transformation functions and test states.

Every seed has the form ``A(t) * exp(a(t) x^2 + b(t) x) * g(x, t)``.  The
exponential envelope has derivatives ``exp(...) * r_m`` with

    r_0 = 1,  r_1 = 2 a x + b,  r_{m+1} = r_1 r_m + 2 a m r_{m-1}

and ``g`` is a Hermite-type polynomial or a hyperbolic cosine whose
derivatives are known in closed form, so all x-derivatives are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError, SingularEvaluationError, UnsupportedParameterError
from .numerics import SolutionOracle, free_potential, harmonic_potential

SEED_MAX_ORDER = 24


class EnvelopeSolution(SolutionOracle):
    max_order = SEED_MAX_ORDER

    def amplitude(self, t):
        raise NotImplementedError

    def envelope(self, t):
        """``(a(t), b(t))`` of the Gaussian-type envelope."""
        raise NotImplementedError

    def shape_derivs(self, x, t, order):
        raise NotImplementedError

    def _derivs(self, x, t, order):
        a, b = self.envelope(t)
        shape = np.broadcast_shapes(x.shape, t.shape)
        r = np.empty((order + 1,) + shape, dtype=complex)
        r[0] = 1.0
        if order >= 1:
            r[1] = 2 * a * x + b
        for m in range(1, order):
            r[m + 1] = r[1] * r[m] + 2 * a * m * r[m - 1]
        g = self.shape_derivs(x, t, order)
        out = np.zeros_like(r)
        for k in range(order + 1):
            for j in range(k + 1):
                out[k] += math.comb(k, j) * r[k - j] * g[j]
        pref = self.amplitude(t) * np.exp(a * x * x + b * x)
        return out * pref[None, ...]

    def __repr__(self):
        return f"<{type(self).__name__} {self.label}>"


def _half_integer(lam):
    n2 = 2 * lam
    if abs(n2 - round(n2)) > 1e-12 or int(round(n2)) % 2 == 0:
        raise UnsupportedParameterError(
            f"free seeds are implemented for half-integer lambda only, got {lam}")
    return int(round(n2))


class FreeParticleSolution(EnvelopeSolution):
    """``(1+t^2)^(-1/4) exp(i x^2 t / (4+4t^2) + i lam arctan t) Q_lam(z)``.

    ``z = x / sqrt(1+t^2)`` and ``Q_lam`` solves ``Q'' = (z^2/4 + lam) Q``:

    * ``lam = n + 1/2``: ``Q = exp(z^2/4) H_n(iz/sqrt2) = 2^(n/2) i^n exp(z^2/4) q_n(z)``
    * ``lam = -n - 1/2``: ``Q = exp(-z^2/4) He_n(z)`` (square integrable)
    """

    def __init__(self, lam):
        two_lam = _half_integer(lam)
        self.lam = two_lam / 2
        self.growing = two_lam > 0
        self.n = (two_lam - 1) // 2 if self.growing else (-two_lam - 1) // 2
        self.potential = free_potential()
        self.square_integrable = not self.growing
        if self.growing:
            self.node_count = self.n % 2
            self._coef = 2 ** (self.n / 2) * 1j ** self.n
        else:
            self.node_count = self.n
            self._coef = 1.0
        self.label = f"free(lambda={self.lam:g})"

    def amplitude(self, t):
        return (1 + t * t) ** -0.25 * np.exp(1j * self.lam * np.arctan(t)) * self._coef

    def envelope(self, t):
        sign = 1.0 if self.growing else -1.0
        return (1j * t + sign) / (4 * (1 + t * t)), 0.0

    def shape_derivs(self, x, t, order):
        s = (1 + t * t) ** -0.5
        z = x * s
        zb = np.broadcast_to(z, np.broadcast_shapes(x.shape, t.shape))
        table = specfun.q_table(self.n, zb) if self.growing else specfun.hermite_he_table(self.n, zb)
        out = np.zeros((order + 1,) + zb.shape)
        for j in range(min(order, self.n) + 1):
            out[j] = specfun.falling(self.n, j) * s ** j * table[self.n - j]
        return out


class OscillatorEigenstate(EnvelopeSolution):
    """``H_n(sqrt(w) x) exp(-i w (2n+1) t - w x^2 / 2)`` in ``U = w^2 x^2``.

    With ``growing=True`` the mirror solution ``H_n(i sqrt(w) x) exp(+i w (2n+1) t + w x^2/2)``
    (eigenvalue ``-w(2n+1)``, not normalisable, ``1/u`` square integrable for even n).
    """

    def __init__(self, n, omega=1.0, growing=False):
        if int(n) != n or n < 0:
            raise DomainError(f"oscillator level must be a non-negative integer, got {n}")
        if omega <= 0:
            raise DomainError(f"oscillator frequency must be positive, got {omega}")
        self.n, self.omega, self.growing = int(n), float(omega), growing
        self.potential = harmonic_potential(self.omega)
        sign = -1.0 if growing else 1.0
        self.constant = sign * self.omega * (2 * self.n + 1)
        self.node_count = self.n % 2 if growing else self.n
        self.square_integrable = not growing
        kind = "growing" if growing else "eigen"
        self.label = f"oscillator-{kind}(n={self.n}, omega={self.omega:g})"

    def amplitude(self, t):
        return np.exp(-1j * self.constant * t)

    def envelope(self, t):
        return (self.omega / 2 if self.growing else -self.omega / 2), 0.0

    def shape_derivs(self, x, t, order):
        scale = math.sqrt(self.omega) * (1j if self.growing else 1.0)
        y = np.broadcast_to(x, np.broadcast_shapes(x.shape, t.shape)) * scale
        table = specfun.hermite_h_table(self.n, y)
        return specfun.poly_derivs(table, self.n, order, scale=scale, factor=2)


class OscillatorNonstationarySeed(EnvelopeSolution):
    """``sin^(-1/2)(2wt) cosh(lam x / sin 2wt) exp[i (w x^2 - lam^2/w) cot(2wt) / 2]``.

    Solves the oscillator equation wherever ``sin(2wt) > 0``; nodeless and not
    square integrable.
    """

    def __init__(self, lam, omega=1.0):
        if omega <= 0:
            raise DomainError(f"oscillator frequency must be positive, got {omega}")
        self.lam, self.omega = float(lam), float(omega)
        self.potential = harmonic_potential(self.omega)
        self.node_count = 0
        self.square_integrable = False
        self.label = f"oscillator-nonstationary(lambda={self.lam:g}, omega={self.omega:g})"

    def _sin(self, t):
        s = np.sin(2 * self.omega * t)
        if np.any(s <= 0):
            raise SingularEvaluationError(
                f"{self.label} requires sin(2 omega t) > 0",
                np.unique(np.asarray(t)[np.broadcast_to(s <= 0, np.shape(t))])[:10])
        return s

    def amplitude(self, t):
        s = self._sin(t)
        cot = np.cos(2 * self.omega * t) / s
        return s ** -0.5 * np.exp(-1j * self.lam ** 2 * cot / (2 * self.omega))

    def envelope(self, t):
        s = self._sin(t)
        return 0.5j * self.omega * np.cos(2 * self.omega * t) / s, 0.0

    def shape_derivs(self, x, t, order):
        kappa = self.lam / self._sin(t)
        arg = kappa * x
        ch, sh = np.cosh(arg), np.sinh(arg)
        return np.stack([kappa ** j * (ch if j % 2 == 0 else sh) for j in range(order + 1)])


def free_particle_solution(lam) -> FreeParticleSolution:
    return FreeParticleSolution(lam)


def oscillator_eigenstate(n, omega=1.0) -> OscillatorEigenstate:
    return OscillatorEigenstate(n, omega)


def oscillator_growing_state(n, omega=1.0) -> OscillatorEigenstate:
    return OscillatorEigenstate(n, omega, growing=True)


def oscillator_nonstationary_seed(lam, omega=1.0) -> OscillatorNonstationarySeed:
    return OscillatorNonstationarySeed(lam, omega)


@dataclass(frozen=True)
class SeedSpec:
    """Serializable description of a seed (used by configs and the CLI)."""

    family: str
    lam: float | None = None
    n: int | None = None
    omega: float = 1.0

    FAMILIES = ("free-lambda", "oscillator-eigen", "oscillator-growing", "oscillator-nonstationary")

    def build(self) -> SolutionOracle:
        if self.family == "free-lambda":
            return free_particle_solution(self.lam)
        if self.family == "oscillator-eigen":
            return oscillator_eigenstate(self.n, self.omega)
        if self.family == "oscillator-growing":
            return oscillator_growing_state(self.n, self.omega)
        if self.family == "oscillator-nonstationary":
            return oscillator_nonstationary_seed(self.lam, self.omega)
        raise DomainError(f"unknown seed family {self.family!r}")

    @property
    def node_count(self):
        return self.build().node_count

    @classmethod
    def from_dict(cls, d):
        return cls(family=d["family"], lam=d.get("lambda"), n=d.get("n"),
                   omega=float(d.get("omega", 1.0)))


def free_l2_state(n) -> FreeParticleSolution:
    """``psi_{-n-1/2}``: the square-integrable free family, ``n`` nodes."""
    return free_particle_solution(-n - 0.5)


def catalog():
    """Every cataloged seed (the battery used by the acceptance suite)."""
    seeds = [free_particle_solution(s * (n + 0.5)) for n in range(7) for s in (1, -1)]
    seeds += [oscillator_eigenstate(n, 1.0) for n in range(5)]
    seeds.append(oscillator_nonstationary_seed(0.7, 1.0))
    return seeds
