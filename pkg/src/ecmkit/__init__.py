"""ecmkit: analytic ECM performance models for steady-state loop kernels."""

from .ecm import (EcmContribution, EcmPrediction, compose, contributions, multicore, predict,
                  saturation_sweep, work_rate)
from .errors import ConfigError, EcmError, UnmatchedRecordError, UnsupportedError
from .kernel import KernelSpec, StreamSpec, in_core_times, load_kernel
from .machine import MachineModel, SimdLevel, load_machine, peak_performance, rescale_frequency
from .traffic import (Residence, TrafficBreakdown, link_volumes, traffic, worst_case_branching,
                      worst_case_random_traffic)

__version__ = "0.1.0"
