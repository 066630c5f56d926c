"""Polynomial families used by the free-particle seeds and closed-form potentials.

All evaluations go through three-term recurrences rather than expanded
coefficients.  Validated for degrees up to about 20; beyond that the
values are still produced but round-off growth has not been characterised.

Derivative rules used throughout::

    He_k' = k He_{k-1}        H_k' = 2k H_{k-1}        q_k' = k q_{k-1}
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def _check_degree(k):
    if int(k) != k or k < 0:
        raise DomainError(f"polynomial degree must be a non-negative integer, got {k}")
    return int(k)


def _table(k, z, step):
    """Values ``p_0 .. p_k`` of ``p_{j+1} = z p_j - step(j) p_{j-1}``."""
    z = np.asarray(z)
    out = np.empty((k + 1,) + z.shape, dtype=np.result_type(z, float))
    out[0] = 1.0
    if k >= 1:
        out[1] = z
    for j in range(1, k):
        out[j + 1] = z * out[j] - step(j) * out[j - 1]
    return out


def hermite_he_table(k, z):
    """Probabilists' Hermite ``He_0(z) .. He_k(z)``."""
    return _table(_check_degree(k), z, lambda j: j)


def hermite_he(k, z):
    """``He_k(z)``, from ``He_{k+1} = z He_k - k He_{k-1}``."""
    return hermite_he_table(k, z)[-1]


def hermite_h_table(k, z):
    """Physicists' Hermite ``H_0(z) .. H_k(z)`` (complex ``z`` allowed)."""
    k = _check_degree(k)
    z = np.asarray(z)
    out = np.empty((k + 1,) + z.shape, dtype=np.result_type(z, float))
    out[0] = 1.0
    if k >= 1:
        out[1] = 2 * z
    for j in range(1, k):
        out[j + 1] = 2 * z * out[j] - 2 * j * out[j - 1]
    return out


def hermite_h(k, z):
    return hermite_h_table(k, z)[-1]


def q_table(k, z):
    """``q_0 .. q_k`` where ``q_j(z) = (-i)^j He_j(iz)``.

    Substituting into the He recurrence gives ``q_{j+1} = z q_j + j q_{j-1}``:
    all coefficients are non-negative, so even-degree members never vanish
    on the real line.
    """
    return _table(_check_degree(k), z, lambda j: -j)


def q_poly(k, z):
    return q_table(k, z)[-1]


def q_poly_complex(k, z):
    """Direct evaluation of ``(-i)^k He_k(iz)`` in complex arithmetic."""
    k = _check_degree(k)
    return (-1j) ** k * hermite_he(k, 1j * np.asarray(z, dtype=float))


def falling(n, j):
    """``n! / (n-j)!``, zero when ``j > n``."""
    return math.perm(n, j) if j <= n else 0


def poly_derivs(table, k, order, scale=1.0, factor=1):
    """Derivatives ``d^j/dx^j p_k(scale * x)`` for ``j <= order``.

    ``table`` holds ``p_0..p_k`` at ``scale * x`` for a family obeying
    ``p_k' = factor * k * p_{k-1}``.
    """
    shape = table.shape[1:]
    out = np.zeros((order + 1,) + shape, dtype=table.dtype)
    for j in range(min(order, k) + 1):
        out[j] = falling(k, j) * (factor * scale) ** j * table[k - j]
    return out


def j_table(k, z):
    """``J_0 .. J_k`` with ``J_j = j J_{j-1} + He_j^2``, plus first two derivatives.

    Returns ``(J, J', J'')`` each of shape ``(k+1,) + z.shape``.
    """
    k = _check_degree(k)
    z = np.asarray(z, dtype=float)
    he = hermite_he_table(k + 1, z)
    J = np.empty((k + 1,) + z.shape)
    dJ = np.empty_like(J)
    d2J = np.empty_like(J)
    J[0], dJ[0], d2J[0] = 1.0, 0.0, 0.0
    for j in range(1, k + 1):
        J[j] = j * J[j - 1] + he[j] ** 2
        dJ[j] = j * dJ[j - 1] + 2 * j * he[j] * he[j - 1]
        hem2 = he[j - 2] if j >= 2 else 0.0
        d2J[j] = j * d2J[j - 1] + 2 * j * (j * he[j - 1] ** 2 + (j - 1) * he[j] * hem2)
    return J, dJ, d2J


def j_poly(k, z):
    """``J_k(z) = k! sum_s He_s(z)^2 / s!``; strictly positive for real ``z``."""
    return j_table(k, z)[0][-1]


def _check_ml(m, l):
    m, l = _check_degree(m), _check_degree(l)
    if l <= m:
        raise DomainError(f"f_ml needs l > m, got m={m}, l={l}")
    return m, l


def f_poly(m, l, z):
    """``f_ml(z) = q_m q_{l+1} - q_l q_{m+1}``."""
    m, l = _check_ml(m, l)
    q = q_table(l + 1, z)
    return q[m] * q[l + 1] - q[l] * q[m + 1]


def f_poly_derivs(m, l, z, order=2):
    """``f_ml`` and its z-derivatives up to ``order`` (Leibniz on the q's)."""
    m, l = _check_ml(m, l)
    q = q_table(l + 1, z)
    out = np.zeros((order + 1,) + np.shape(z))
    for j in range(order + 1):
        for i in range(j + 1):
            c = math.comb(j, i)
            a = falling(m, i) * q[m - i] if i <= m else 0.0
            b = falling(l + 1, j - i) * q[l + 1 - (j - i)]
            cc = falling(l, i) * q[l - i] if i <= l else 0.0
            d = falling(m + 1, j - i) * q[m + 1 - (j - i)] if j - i <= m + 1 else 0.0
            out[j] += c * (a * b - cc * d)
    return out
