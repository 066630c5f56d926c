"""Time-dependent Darboux and Crum transformations of the Schrodinger equation.

Convention: ``i psi_t = (-d2/dx2 + U) psi``; transformed potentials are
``U_N = U_0 - (log |W|^2)_xx`` with ``W`` the Wronskian of the chain seeds.
"""

from .darboux import (DarbouxChain, apply_chain, gauge_factor, krein_admissible, log_deriv,
                      reality_residual, transformed_potential, wronskian_sign_scan)
from .errors import (AccuracyError, BoxTooSmallError, CapabilityError, DegenerateChainError,
                     DomainError, PoleError, RealityViolationError, SingularEvaluationError,
                     TdsusyError, UnsupportedParameterError)
from .numerics import (HALF_LINE, REAL_LINE, Interval, SpaceTimeGrid, fd_schrodinger_residual,
                       free_potential, harmonic_potential, quadrature, wronskian)
from .pde import PropagationRun, convergence_study, propagate
from .potentials import PotentialFamily
from .seeds import (SeedSpec, catalog, free_l2_state, free_particle_solution, oscillator_eigenstate,
                    oscillator_growing_state, oscillator_nonstationary_seed)
from .superalgebra import InverseOperator, SuperState

__version__ = "0.1.0"
