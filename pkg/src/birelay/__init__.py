"""Buffer-aided bidirectional relay network simulator.

A three-node network (two users exchanging data through a half-duplex
decode-and-forward relay with two buffers) simulated slot by slot under
adaptive mode selection with optimal power allocation, plus fixed-schedule
and fixed-power baselines for comparison.
"""

from .benchmarks import BenchmarkConfig, PreparedBenchmark, fixed_power_policy, tdbc_policy
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    ThresholdEvaluation,
    calibrate,
    evaluate_thresholds,
)
from .channel import ChannelState, ChannelTrace, FadingStatistics, empirical_means, sample_trace
from .engine import ProtocolPolicy, QueueState, RateReport, SlotFlows, run, step
from .oracle import GridSpec, ScanPoint, grid_max_metric, t_sweep, threshold_region_scan
from .policy import (
    ModePowers,
    SelectionMetrics,
    SlotDecision,
    Thresholds,
    decide_slot,
    mode_powers,
    optimal_time_share,
    proposed_policy,
    select_mode,
    selection_metrics,
)
from .rate import LinkCapacities, PowerTriple, cap, link_capacities

__version__ = "0.1.0"

__all__ = [
    "BenchmarkConfig",
    "CalibrationConfig",
    "CalibrationResult",
    "ChannelState",
    "ChannelTrace",
    "FadingStatistics",
    "GridSpec",
    "LinkCapacities",
    "ModePowers",
    "PowerTriple",
    "PreparedBenchmark",
    "ProtocolPolicy",
    "QueueState",
    "RateReport",
    "ScanPoint",
    "SelectionMetrics",
    "SlotDecision",
    "SlotFlows",
    "ThresholdEvaluation",
    "Thresholds",
    "calibrate",
    "cap",
    "decide_slot",
    "empirical_means",
    "evaluate_thresholds",
    "fixed_power_policy",
    "grid_max_metric",
    "link_capacities",
    "mode_powers",
    "optimal_time_share",
    "proposed_policy",
    "run",
    "sample_trace",
    "select_mode",
    "selection_metrics",
    "step",
    "t_sweep",
    "tdbc_policy",
    "threshold_region_scan",
]
