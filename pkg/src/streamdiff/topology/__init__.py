from .forest import (
    FanOutViolation,
    Forest,
    SlotConflict,
    build_forest,
    check_fanout,
    check_slot_conflicts,
    forest_from_placements,
    forest_shape,
    single_tree_forest,
    validate_forest,
)
from .intertwine import (
    DEFAULT_CAP,
    IntertwineAborted,
    IntertwineAssignment,
    IntertwineError,
    IntertwineInfeasible,
    SearchStats,
    solve_intertwining,
)
from .tree import (
    SOURCE,
    ScheduledTree,
    build_single_tree,
    build_tree_shape,
    reception_schedule,
)
