"""Inviscid channel flow coupled to a nonlinear Koiter plate.

A pseudo-spectral (horizontal) / finite-difference (vertical) simulator
for an incompressible, inviscid fluid in a periodic channel whose top
wall is an elastic plate, formulated on the fixed reference channel via
a harmonic-extension domain map.  The package doubles as a verification
library: the map identities, the weak-form elastic operator, the
Robin-Neumann pressure problem, transported vorticity, and damping-
uniform norm bounds are all exposed as testable diagnostics.
"""

from .grid import Grid, random_surface
from .errors import (KchError, ConfigError, CompatibilityError, NumericsError,
                     NondegeneracyError, SmallnessError, ConvergenceError,
                     CFLError)
from .geometry import (GeometryState, harmonic_extension, extension_rate,
                       ale_matrices, geometry_from_plate, piola_residual,
                       laplacian_residual, smallness_report)
from .plate import (PlateParams, PlateState, metric_change, curvature_change,
                    koiter_energy, elastic_operator, membrane_operator,
                    bending_operator, plate_step, plate_energy,
                    energy_gradient_check, NON_NORMALIZED, NORMALIZED)
from .pressure import (EllipticProblem, VerticalSolver, solve_robin_neumann,
                       normalize_surface_mean, assemble_pressure_problem)
from .fluid import (FluidState, VorticityState, momentum_rhs, fluid_step,
                    ale_vorticity, ale_divergence, vorticity_transport_step,
                    divcurl_norms, divergence_cleanup)
from .coupling import (SystemState, PicardConfig, RunParams, CompatReport,
                       check_compatibility, ensure_compatible, picard_timestep,
                       run_simulation, nu_sweep, initial_system_state)
from .diagnostics import (NormReport, NORM_FIELDS, sobolev_proxy,
                          energy_report, apriori_monitor)
from .presets import build_initial_data, REGISTRY

__version__ = "0.1.0"
