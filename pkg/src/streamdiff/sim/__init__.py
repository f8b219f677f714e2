from .engine import (
    AdmissionError,
    CapacityViolation,
    Replay,
    SimView,
    Strategy,
    Trace,
    Transmission,
    simulate,
    validate_capacity,
)
from .metrics import Metrics, chunk_curve, compute_metrics, delays, diffusion_curve
from .strategies import (
    ForestReplay,
    ParallelBalanced,
    RandomStrategy,
    Snowball,
    parallel_balanced_count,
    strategy_parallel_balanced,
    strategy_random,
    strategy_serial_forest,
    strategy_serial_tree,
    strategy_snowball,
)
