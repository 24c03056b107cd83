"""Zero-viscosity-limit solver suite.

Compressible Navier-Stokes / Euler / Prandtl solvers, the matched
asymptotic approximate solution, discrete analytic-norm diagnostics, and a
convergence-rate harness.
"""

__version__ = "0.1.0"

from .domain import (BLField, BLGrid, Field2D, Grid2D, SimParams, State,
                     discrete_mass, make_state, pressure,
                     stretch_for_wall_spacing)
from .initial import compatibility_residual, make_initial_data
from .euler import (EulerTrajectory, WallTraces, cfl_dt, extract_traces,
                    solve_euler, solve_linearized_euler, step_euler)
from .prandtl import (PrandtlSolution, compute_rho_p2, recover_vp,
                      solve_prandtl, solve_prandtl_corrector, step_prandtl)
from .ansatz import AnsatzBundle, assemble_ansatz, ns_residual, residual_report
from .cns import CNSTrajectory, solve_cns, step_cns, total_energy
from .norms import (EnergyConfig, NormSpec, conormal_derivative,
                    energy_diagnostics, gevrey_norm, hardy_apply,
                    lemma_suite, verify_product_inequality,
                    verify_recovery_inequality)
from .harness import (SweepConfig, SweepResult, euler_only_baseline, export,
                      fit_rate, load_config, run_pipeline, sweep)
