"""Gaussian simulation toolkit for three-mode optoelectromechanical
transducers: a mechanical oscillator bridging a microwave and an optical
cavity.

Layers, bottom up:

* :mod:`oemt.model` / :mod:`oemt.presets` - validated parameter sets;
* :mod:`oemt.schedule` - time-dependent coupling schedules and pulses;
* :mod:`oemt.gaussian` - Gaussian states (means + covariances);
* :mod:`oemt.dynamics` - exact piecewise-exponential moment evolution;
* :mod:`oemt.scattering` - frequency-domain conversion matrix and spectra;
* :mod:`oemt.protocols` - named state-transfer/entanglement procedures;
* :mod:`oemt.metrics` - fidelity, entanglement, temperature, gain;
* :mod:`oemt.search` - impedance matching and simplex optimization;
* :mod:`oemt.cli` / :mod:`oemt.io` - config-driven runs into result bundles.
"""

from .errors import (ConfigError, ModelValidationError, NumericalError,
                     OEMTError, PhysicsError, PoleError, PresetError,
                     ScheduleError, SearchError, StabilityError)
from .model import (DriveSpec, LinearizationSpec, ModeSpec, TransducerModel,
                    ValidationReport, validate_model)
from .presets import load_preset, preset_names
from .schedule import (Constant, CouplingSchedule, GaussianRamp, Linear,
                       PulseShape, RaisedCosine, Segment,
                       exponential_rise_pulse, gaussian_pulse, sampled_pulse)
from .gaussian import (GaussianState, coherent_state,
                       displaced_squeezed_state, join_states, thermal_state,
                       two_mode_squeezed_vacuum, vacuum_state)
from .dynamics import (DriftDiffusion, Propagator, adiabatic_eliminate,
                       constant_schedule, coupling_matrix, evolve_covariance,
                       evolve_generator, evolve_mean, schedule_transfer,
                       single_cavity_generator, steady_state,
                       transducer_generator)
from .scattering import (ConversionMatrix, conversion_matrix, halfwidth,
                         noise_budget, probe_spectrum, t31_closed_form)
from .metrics import (bose_occupation, conversion_gain,
                      effective_temperature, gaussian_fidelity,
                      log_negativity, single_photon_noise_bound)
from .protocols import (ProtocolResult, dark_mode_vector,
                        run_adiabatic_dark_mode, run_double_swap,
                        run_entangle_red_blue, run_itinerant,
                        run_precooled_double_swap, run_raman)
from .search import SearchProblem, SearchResult, match_impedance, optimize

__version__ = "0.1.0"
