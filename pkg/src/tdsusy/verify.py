"""Verification suites.

Each suite returns a list of :class:`Check` records; a check either bounds a
residual from above (``tol``) or confines a measured ratio to a ``window``.
Suites are deterministic: fixed seed batteries, fixed grids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import specfun
from .darboux import (DarbouxChain, apply_hamiltonian, factorization_residual, gauge_factor, krein_admissible,
                      reality_residual, wronskian_sign_scan)
from .numerics import HALF_LINE, SpaceTimeGrid, fd_schrodinger_residual
from .pde import PropagationRun, grid_derivative, propagate, convergence_study
from .potentials import PotentialFamily, free_juxtaposed, oscillator_anharmonic
from .seeds import (catalog, free_l2_state, free_particle_solution, oscillator_eigenstate,
                    oscillator_growing_state, oscillator_nonstationary_seed)
from .superalgebra import (InverseOperator, SuperState, anticommutator,
                           anticommutator_check, hamiltonian_symmetry, identity_symmetry,
                           image_overlap, inverse_square_integrable,
                           supercharge_apply, truncated_norm)

RATIO_WINDOW = (3.5, 4.5)


@dataclass
class Check:
    name: str
    identity: str
    residual: float
    tol: float | None = None
    window: tuple | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.residual = float(self.residual)
        if self.window is not None:
            lo, hi = self.window
            self.passed = bool(lo <= self.residual <= hi)
        else:
            self.passed = bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        bound = f"in [{self.window[0]:g}, {self.window[1]:g}]" if self.window else f"<= {self.tol:g}"
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.residual:.3e} {bound}"

    def to_dict(self):
        d = asdict(self)
        if self.window is not None:
            d["window"] = list(self.window)
        return d


def _time_grid(x_range, t_range, tau):
    n = int(round((t_range[1] - t_range[0]) / tau)) + 1
    return SpaceTimeGrid.uniform(x_range, (t_range[0], t_range[1], n))


def fd_pair(psi, U, x_range, t_range, tau):
    """Relative FD residual at ``tau`` and the ratio against ``tau/2``."""
    coarse = fd_schrodinger_residual(psi, U, _time_grid(x_range, t_range, tau))
    fine = fd_schrodinger_residual(psi, U, _time_grid(x_range, t_range, tau / 2))
    return coarse, (coarse / fine if fine > 0 else math.inf)


def _fd_checks(name, identity, psi, U, x_range, t_range, tau, tol):
    res, ratio = fd_pair(psi, U, x_range, t_range, tau)
    return [Check(name, identity, res, tol),
            Check(name + " ratio", identity + " (second-order convergence)", ratio,
                  window=RATIO_WINDOW)]


# ---------------------------------------------------------------------------


def suite_seeds():
    out = []
    for s in catalog():
        # the nonstationary seed is singular at sin(2 omega t) = 0; stay around pi / (4 omega)
        t_range = (0.5, 1.0) if "nonstationary" in s.label else (0.0, 2.0)
        out += _fd_checks(f"seed {s.label}", "(i d_t - H_0) u = 0", s, s.potential,
                          (-6, 6, 61), t_range, 1e-3, 1e-5)
    return out


def intertwine_chains():
    """``(chain, test states, time window)`` covering N = 1, 2 over both seed potentials."""
    w = 0.5
    return [
        (DarbouxChain([free_particle_solution(0.5)]), [free_l2_state(n) for n in range(5)],
         (0.0, 1.0)),
        (DarbouxChain([free_l2_state(0), free_l2_state(1)]), [free_l2_state(n) for n in range(2, 7)],
         (0.0, 1.0)),
        (DarbouxChain([oscillator_eigenstate(0, w)]),
         [oscillator_eigenstate(n, w) for n in range(1, 6)], (0.0, 0.5)),
        (DarbouxChain([oscillator_eigenstate(0, w), oscillator_eigenstate(1, w)]),
         [oscillator_eigenstate(n, w) for n in range(2, 7)], (0.0, 0.5)),
        (DarbouxChain([oscillator_nonstationary_seed(0.7, w)], t_ref=math.pi / (4 * w)),
         [oscillator_eigenstate(n, w) for n in range(5)], (0.2 / w, 0.6 / w)),
    ]


def suite_intertwine():
    out = []
    for chain, tests, t_range in intertwine_chains():
        U1 = chain.transformed_potential()
        for psi in tests:
            out += _fd_checks(f"intertwine {chain.label} on {psi.label}",
                              "(i d_t - H_1) L psi = 0", chain.transform(psi), U1,
                              (-6, 6, 41), t_range, 1e-3, 1e-4)
    return out


def suite_reality():
    out = []
    chains = [DarbouxChain([s]) for s in catalog()]
    chains += [DarbouxChain([free_l2_state(n), free_l2_state(n + 1)]) for n in range(6)]
    chains += [DarbouxChain([free_particle_solution(m + 0.5), free_particle_solution(l + 0.5)])
               for m, l in ((0, 1), (0, 3), (2, 5), (4, 9))]
    for ch in chains:
        nonstat = any("nonstationary" in s.label for s in ch.seeds)
        grid = SpaceTimeGrid.uniform((-5, 5, 40), (0.2, 0.6, 9) if nonstat else (0, 2, 9))
        out.append(Check(f"reality {ch.label}", "Im (log W)_xxx = 0", reality_residual(ch, grid),
                         1e-10))
    ts = np.linspace(0, 3, 13)
    for lam in (0.5, -0.5, 3.5, -6.5):
        g = gauge_factor(DarbouxChain([free_particle_solution(lam)]), ts)
        out.append(Check(f"gauge free(lambda={lam:g})", "L_1(t) = sqrt(1 + t^2)",
                         np.max(np.abs(g - np.sqrt(1 + ts ** 2))), 1e-9))
    ts = np.linspace(0.1, 1.4, 14)
    ch = DarbouxChain([oscillator_nonstationary_seed(0.7, 1.0)], t_ref=math.pi / 4)
    out.append(Check("gauge oscillator-nonstationary", "L_1(t) = sin(2 w t)",
                     np.max(np.abs(gauge_factor(ch, ts) - np.sin(2 * ts))), 1e-9))
    return out


def suite_factorize():
    out = []
    grid = SpaceTimeGrid.uniform((-5, 5, 41), (0, 1, 5))
    tests = [oscillator_eigenstate(n, 1.0) for n in range(5)]
    for seeds in ([oscillator_eigenstate(0)], [oscillator_eigenstate(0), oscillator_eigenstate(1)],
                  [oscillator_growing_state(0)]):
        ch = DarbouxChain(seeds)
        out.append(Check(f"factorize {ch.label}", "L+L = prod(h_0 - C_i), LL+ = prod(h_1 - C_i)",
                         factorization_residual(ch, tests, grid), 1e-8))
    ch = DarbouxChain([oscillator_eigenstate(0)])
    X, T = grid.mesh()
    worst = 0.0
    for n, psi in enumerate(tests):
        lhs = ch.adjoint(ch.apply_factorized(psi)).value(X, T)
        worst = max(worst, float(np.max(np.abs(lhs - 2 * n * psi.value(X, T)))))
    out.append(Check("eigenvalue identity on ground-state chain", "(L+L) psi_n = 2n psi_n",
                     worst, 1e-8))
    return out


def suite_inverse():
    out = []
    ch = DarbouxChain([free_particle_solution(0.5)])
    M = InverseOperator(ch)
    u = ch.seeds[0]
    ok = all(inverse_square_integrable(u, t) for t in (0.0, 1.0))
    out.append(Check("1/u square integrable", "|1/u|^2 integrable on the line",
                     0.0 if ok else math.inf, 0.0))
    x = np.linspace(-4, 4, 17)[None, :]
    t = np.array([0.0, 0.5, 1.0])[:, None]
    lm = ml = 0.0
    for n in range(5):
        psi = free_l2_state(n)
        phi = ch.transform(psi)
        ref = phi.value(x, t)
        lm = max(lm, float(np.max(np.abs(ch.transform(M(phi)).value(x, t) - ref)) / np.max(np.abs(ref))))
        ref = psi.value(x, t)
        ml = max(ml, float(np.max(np.abs(M(ch.transform(psi)).value(x, t) - ref)) / np.max(np.abs(ref))))
    out.append(Check("L M phi = phi", "L M = 1 on the image of L", lm, 1e-6))
    out.append(Check("M L psi = psi", "M L = 1 on square-integrable states", ml, 1e-6))
    ov = max(image_overlap(M, ch.transform(free_l2_state(n)), 0.5) for n in range(3))
    out.append(Check("image orthogonal to phi_0", "<phi_0, L psi> = 0", ov, 1e-8))
    return out


def suite_superalgebra():
    out = []
    grid = SpaceTimeGrid.uniform((-4, 4, 33), (0, 1, 5))
    X, T = grid.mesh()
    ch = DarbouxChain([oscillator_eigenstate(0)])
    states = [oscillator_eigenstate(n) for n in range(1, 5)]
    U1 = ch.transformed_potential()
    c = ch.constants[0]
    q2 = qd2 = anti = 0.0
    for i, psi in enumerate(states):
        S = SuperState(psi, ch.transform(states[(i + 1) % len(states)]), ch)
        q2 = max(q2, float(np.max(np.abs(
            supercharge_apply("Q", supercharge_apply("Q", S)).values(X, T)))))
        qd2 = max(qd2, float(np.max(np.abs(
            supercharge_apply("Q+", supercharge_apply("Q+", S)).values(X, T)))))
        lhs = anticommutator(lambda s: supercharge_apply("Q", s),
                             lambda s: supercharge_apply("Q+", s))(S).values(X, T)
        # independent route: the Hamiltonians themselves, no L or L+ involved
        rhs = np.stack([apply_hamiltonian(ch.seed_potential, S.upper, c).value(X, T),
                        apply_hamiltonian(U1, S.lower, c).value(X, T)])
        anti = max(anti, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))
    out.append(Check("Q^2 = 0", "Q Q = 0", q2, 0.0))
    out.append(Check("(Q+)^2 = 0", "Q+ Q+ = 0", qd2, 0.0))
    out.append(Check("{Q, Q+} = H - C", "{Q, Q+} = diag(h_0 - C, h_1 - C)", anti, 1e-9))

    grid = SpaceTimeGrid.uniform((-3, 3, 13), (0, 1, 5))
    free = DarbouxChain([free_particle_solution(0.5)])
    out.append(Check("{P0, Q_g} = G_g, g = 1", "{P_0, Q_g} = G_g",
                     anticommutator_check(identity_symmetry, free,
                                          [free_l2_state(n) for n in range(4)], grid), 1e-6))
    osc = DarbouxChain([oscillator_growing_state(0)])
    out.append(Check("{P0, Q_g} = G_g, g = h", "{P_0, Q_g} = G_g",
                     anticommutator_check(hamiltonian_symmetry(osc), osc,
                                          [oscillator_eigenstate(n) for n in range(4)], grid),
                     1e-6))
    return out


def family_cases():
    cases = [("free-even", {"k": k}) for k in range(7)]
    cases += [("free-odd", {"k": k}) for k in range(7)]
    cases += [("free-juxtaposed", {"n": n}) for n in range(7)]
    cases += [("free-evenodd", {"m": m, "l": l}) for m in (0, 2, 4) for l in (1, 3, 5, 7, 9) if l > m]
    cases += [("oscillator-anharmonic", {"lam": lam, "omega": 1.0}) for lam in (0.3, 0.7, 1.5)]
    return cases


def _family_mesh(fam):
    xs = np.linspace(0.5, 8, 61) if fam.domain is HALF_LINE else np.linspace(-8, 8, 61)
    ts = np.linspace(0.2, 0.6, 7) if fam.family == "oscillator-anharmonic" else np.linspace(0, 2, 7)
    return xs[None, :], ts[:, None]


def suite_families():
    out = []
    worst = {}
    for name, p in family_cases():
        fam = PotentialFamily(name, p)
        X, T = _family_mesh(fam)
        closed = fam(X, T)
        engine = fam.chain().transformed_potential()(X, T)
        d = float(np.max(np.abs(closed - engine) / np.maximum(1.0, np.abs(closed))))
        worst[name] = max(worst.get(name, 0.0), d)
    for name, d in worst.items():
        out.append(Check(f"family {name}", "closed form = U_0 - (log|W|^2)_xx", d, 1e-8))

    x = np.linspace(-4, 4, 17)
    ch = PotentialFamily("free-juxtaposed", {"n": 2}).chain()
    dev = np.max(np.abs(free_juxtaposed(2, x, 1.0, literal=True) - ch.transformed_potential()(x, 1.0)))
    out.append(Check("juxtaposed literal prefactor (1+t^2) disagrees", "adjudicated (1+t^2)^-1",
                     dev, window=(1e-3, math.inf)))
    ch = PotentialFamily("oscillator-anharmonic", {"lam": 0.7}).chain()
    dev = np.max(np.abs(oscillator_anharmonic(0.7, 1.0, x, 0.3, literal=True)
                        - ch.transformed_potential()(x, 0.3)))
    out.append(Check("anharmonic literal sin^-1/2 disagrees", "adjudicated sin^-2",
                     dev, window=(1e-3, math.inf)))

    X, T = np.linspace(-5, 5, 21)[None, :], np.linspace(0, 3, 7)[:, None]
    out.append(Check("free-even k=0", "U = -1/(1+t^2)",
                     np.max(np.abs(PotentialFamily("free-even", {"k": 0})(X, T) + 1 / (1 + T ** 2))),
                     1e-12))
    golden = [(0, 0.7, 1.0), (1, 2.0, 5.0), (2, 1.0, 4.0)]
    err = max(abs(specfun.j_poly(k, z) - v) for k, z, v in golden)
    out.append(Check("J golden values", "J_0 = 1, J_1(2) = 5, J_2(1) = 4", err, 0.0))
    return out


def suite_regularity():
    out = []
    grid = SpaceTimeGrid.uniform((-8, 8, 801), (0, 2, 5))
    sets = [(k,) for k in range(7)] + list(itertools.combinations(range(7), 2))
    mismatched = []
    for idx in sets:
        scan = wronskian_sign_scan(DarbouxChain([free_l2_state(k) for k in idx]), grid)
        if krein_admissible(idx) != (scan == 0):
            mismatched.append(idx)
    out.append(Check("Krein criterion vs sign scan", "admissible <=> W keeps its sign",
                     len(mismatched), 0))
    for k in (1, 2):
        scan = wronskian_sign_scan(DarbouxChain([free_l2_state(k)]), grid)
        out.append(Check(f"sign changes of W(u_{k})", "inadmissible => W changes sign", scan,
                         window=(1, math.inf)))

    X, T = np.linspace(-6, 6, 49)[None, :], np.array([0.0, 1.0])[:, None]
    for n in range(5):
        ch = DarbouxChain([free_l2_state(n), free_l2_state(n + 1)])
        kill = max(float(np.max(np.abs(ch.transform(free_l2_state(k)).value(X, T))))
                   / float(np.max(np.abs(free_l2_state(k).value(X, T)))) for k in (n, n + 1))
        out.append(Check(f"L u_k = 0 on chain (u_{n}, u_{n + 1})", "L u_k = 0 for chain seeds",
                         kill, 1e-10))
        drift = 0.0
        for k in (j for j in range(7) if j not in (n, n + 1)):
            phi = ch.transform(free_l2_state(k))
            a, b = truncated_norm(phi, 1.0, 8.0), truncated_norm(phi, 1.0, 16.0)
            drift = max(drift, abs(b - a) / b)
        out.append(Check(f"truncated norms on chain (u_{n}, u_{n + 1})",
                         "||L psi_k|| finite (X -> 2X)", drift, 1e-2))
    return out


def suite_pde():
    out = []
    psi = free_l2_state(0)
    run = PropagationRun(lambda x, t: 0 * x, (-12, 12), 0.02, 5e-4, 1.0, lambda x: psi.value(x, 0.0))
    res = propagate(run)
    out.append(Check("propagate free psi_{-1/2}", "CN solution = analytic", res.l2(psi.value(res.x, 1.0)),
                     1e-3))
    out.append(Check("norm drift (U = 0)", "discrete unitarity", res.norm_drift, 1e-10))

    ch = DarbouxChain([free_particle_solution(0.5)])
    U1 = ch.transformed_potential()
    phi = ch.transform(psi)
    run = PropagationRun(lambda x, t: U1(x, t).real, (-14, 14), 0.02, 5e-4, 1.0,
                         lambda x: phi.value(x, 0.0))
    r1 = propagate(run)
    r0 = propagate(PropagationRun(lambda x, t: 0 * x, (-14, 14), 0.02, 5e-4, 1.0,
                                  lambda x: psi.value(x, 0.0)))
    dx = r0.x[1] - r0.x[0]
    u = ch.seeds[0].derivs(r0.x, 1.0, 1)
    Lpsi = ch.gauge(1.0) * (grid_derivative(r0.psi, dx) - u[1] / u[0] * r0.psi)
    out.append(Check("propagate L psi under U_1", "CN(L psi) = L CN(psi)", r1.l2(Lpsi), 5e-3))
    out.append(Check("norm drift (time-dependent U_1)", "discrete unitarity", r1.norm_drift, 1e-8))

    run = PropagationRun(lambda x, t: 0 * x, (-12, 12), 0.08, 4e-3, 1.0, lambda x: psi.value(x, 0.0),
                         exact=psi.value)
    errors, ratios, monotone = convergence_study(run, 3)
    for i, r in enumerate(ratios):
        out.append(Check(f"CN convergence ratio level {i + 1}", "second-order (h, tau) halving", r,
                         window=(3.2, 4.8)))

    osc = oscillator_eigenstate(1, 1.0)
    T_ = math.pi
    r = propagate(PropagationRun(lambda x, t: x * x, (-10, 10), 0.01, 1e-3, T_,
                                 lambda x: osc.value(x, 0.0)))
    p0 = osc.value(r.x, 0.0)
    amp = np.vdot(p0, r.psi) / np.vdot(p0, p0)
    out.append(Check("oscillator n=1 phase after one period", "psi_1(T) = e^{-3iT} psi_1(0)",
                     abs(amp - np.exp(-3j * T_)), 1e-3))
    return out


SUITES = {
    "seeds": suite_seeds,
    "intertwine": suite_intertwine,
    "reality": suite_reality,
    "factorize": suite_factorize,
    "inverse": suite_inverse,
    "superalgebra": suite_superalgebra,
    "families": suite_families,
    "regularity": suite_regularity,
    "pde": suite_pde,
}


def run_suite(name: str, tol: float | None = None):
    """Run one suite (or ``all``); ``tol`` replaces every upper-bound tolerance."""
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(name)
    checks = []
    for n in names:
        for c in SUITES[n]():
            if tol is not None and c.window is None:
                c = Check(c.name, c.identity, c.residual, tol)
            checks.append(c)
    return checks
