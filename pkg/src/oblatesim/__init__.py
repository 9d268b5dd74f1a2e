"""Rotating homogeneous ellipsoid of revolution with a stochastically
fluctuating flattening: admissible deformation laws, invariance-preserving
integration of the coupled rotation/inertia system, and Monte Carlo
estimation of the noise-induced secular drift in the dynamical flattening
and the second zonal harmonic."""

__version__ = "0.1.0"

from .core import (EllipsoidParams, EllipsoidState, FlatteningObservables,
                   a_squared_from_c, inertia_from_axes, initial_state,
                   observables)
from .deformation import (AdmissibilityReport, DeformationLaw, ToyModelParams,
                          check_deterministic_admissible,
                          check_stochastic_admissible, toy_diffusion,
                          toy_drift, toy_law, zero_law)
from .dynamics import (SystemIncrement, SystemState,
                       deterministic_inertia_rates, flattening_increments,
                       stochastic_inertia_coeffs, stochastic_system_increment,
                       torque_terms)
from .integrate import (BrownianPath, IntegratorConfig, StepUnderflowError,
                        Trajectory, euler_maruyama_step, euler_step,
                        invariance_preserving_run, path_generator,
                        simulate_paths)
from .experiments import (DAY, ConvergenceResult, DriftReport, EnsembleConfig,
                          EnsembleSummary, convergence_study,
                          derive_observable, drift_validation,
                          gbm_convergence, run_ensemble, strong_convergence,
                          summarize)
