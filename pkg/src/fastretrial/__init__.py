"""Fast-retrial random access for delay-sensitive MTC devices.

Simulator, closed-form stability analysis, adaptive preamble-pool controller
and an exact Markov-chain oracle for tiny instances.
"""

from fastretrial.config import ConfigError, ScenarioConfig
from fastretrial.controller import ControllerState, estimate_total_rate, update
from fastretrial.engine import RunMetrics, detect_instability, run, sweep
from fastretrial.model import (
    ArrivalLaw,
    ArrivalModel,
    DeviceState,
    SlotOutcome,
    resolve_collisions,
    sample_arrivals,
    select_preambles,
    step_slot,
)
from fastretrial.stability import (
    StabilityReport,
    check_stability,
    full_load_success_prob,
    max_stable_n1,
    min_stable_l1,
    optimal_z,
)

__version__ = "0.1.0"
