"""Slot-level simulator of a crossbar switch whose ports split into transport
ports (external traffic) and function ports (a pool of service-chain
processors), with three iterative VOQ schedulers to compare."""

from .classify import (
    Classifier,
    Filtered,
    Forward,
    Hop,
    ServiceChain,
    ServicePath,
    SfpTag,
    default_pool_layout,
)
from .engine import SimConfig, Simulation, SlotReport
from .errors import (
    ClassificationError,
    ConfigError,
    InvariantError,
    PoolSwitchError,
    UndefinedMetricError,
)
from .fabric import (
    CELL_SIZE_BYTES,
    CellRef,
    EnqueueResult,
    FabricState,
    PortKind,
    PortMap,
    enqueue_cell,
    transfer_matched,
)
from .harness import SweepPlan, run_sweep, write_csv
from .metrics import (
    RunMetrics,
    WindowCounts,
    avg_delay_slots,
    drop_rate,
    per_output_delivered,
    summarize,
    throughput,
    total_counts,
    window_counts,
)
from .pool import PoolState, ingest_cell, release_due
from .sched import (
    BscFirmScheduler,
    FirmScheduler,
    IslipScheduler,
    Matching,
    SCHEDULER_NAMES,
    Scheduler,
    ServiceCapacity,
    make_scheduler,
    sc_compare,
    sc_sort_key,
)
from .traffic import MODEL_NAMES, Arrival, TrafficModel, TrafficSpec

__version__ = "0.1.0"

__all__ = [
    "Arrival",
    "BscFirmScheduler",
    "CELL_SIZE_BYTES",
    "CellRef",
    "ClassificationError",
    "Classifier",
    "ConfigError",
    "EnqueueResult",
    "FabricState",
    "Filtered",
    "FirmScheduler",
    "Forward",
    "Hop",
    "InvariantError",
    "IslipScheduler",
    "MODEL_NAMES",
    "Matching",
    "PoolState",
    "PoolSwitchError",
    "PortKind",
    "PortMap",
    "RunMetrics",
    "SCHEDULER_NAMES",
    "Scheduler",
    "ServiceCapacity",
    "ServiceChain",
    "ServicePath",
    "SfpTag",
    "SimConfig",
    "Simulation",
    "SlotReport",
    "SweepPlan",
    "TrafficModel",
    "TrafficSpec",
    "UndefinedMetricError",
    "WindowCounts",
    "avg_delay_slots",
    "default_pool_layout",
    "drop_rate",
    "enqueue_cell",
    "ingest_cell",
    "make_scheduler",
    "per_output_delivered",
    "release_due",
    "run_sweep",
    "sc_compare",
    "sc_sort_key",
    "summarize",
    "throughput",
    "total_counts",
    "transfer_matched",
    "window_counts",
    "write_csv",
]
