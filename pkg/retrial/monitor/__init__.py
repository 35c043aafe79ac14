"""Progress monitoring from k-step value self-consistency."""

from retrial.monitor.engine import (  # noqa: F401
    MonitorConfig,
    ProgressVerdict,
    ValueHistory,
    bellman_target_scalar,
    check_categorical,
    check_scalar,
    observe_and_judge,
)
from retrial.monitor.trace import emit_trace  # noqa: F401
