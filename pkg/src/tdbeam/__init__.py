"""Time-division energy beamforming for multiuser wireless power transfer
under a sigmoid (non-linear) energy harvesting model."""

from .channel import (ChannelModelParams, ChannelSet, dbm_to_watts, example1_channels, los_row,
                      sample_channels)
from .eh_model import EhParams, dc_power, dc_power_derivative, inflection_point
from .harness import ScenarioConfig, run_example1, run_sweep
from .schemes import (AlgorithmSettings, Schedule, SolveReport, evaluate, isotropic, multibeam,
                      tdma, time_division)
from .solver_kernels import (Covariance, SolverCertificate, isotropic_covariance, mrt_covariance,
                             solve_multibeam, solve_sca_subproblem, solve_time_lp)

__version__ = "0.1.0"
