"""Method registry – maps benchmark method names to deployment flags.

``interval_recovery@<buffer>`` resolves to the interval baseline with a
custom buffer, which is how buffer sweeps are expressed.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from enum import Enum
from typing import Callable, Dict, List, Optional

from retrial.core.errors import ConfigurationError
from retrial.deploy.runner import DeployConfig, interval_period
from retrial.monitor.engine import MonitorConfig

logger = logging.getLogger(__name__)

INTERVAL_PREFIX = "interval_recovery@"


class Method(str, Enum):
    BASE_NO_RECOVERY = "base_no_recovery"
    INTERVAL_RECOVERY = "interval_recovery"
    OURS_NO_SKEW = "ours_no_skew"
    OURS_FULL = "ours_full"


DEFAULT_METHODS: List[str] = [m.value for m in Method]

Builder = Callable[[MonitorConfig, Optional[float]], DeployConfig]

# Registry: name -> builder(monitor_cfg, interval_buffer) -> DeployConfig
_METHODS: Dict[str, Builder] = {}


def register(name: str, builder: Builder) -> None:
    """Register a method by name."""
    _METHODS[name] = builder


def get_method(name: str) -> Builder:
    if name.startswith(INTERVAL_PREFIX):
        buffer = parse_buffer(name)
        base = _METHODS[Method.INTERVAL_RECOVERY.value]
        return lambda mon, _buf=None: base(mon, buffer)
    if name not in _METHODS:
        raise KeyError(f"Method '{name}' not registered. Available: {list(_METHODS.keys())}")
    return _METHODS[name]


def list_methods() -> List[str]:
    return list(_METHODS.keys())


def parse_buffer(name: str) -> float:
    try:
        return float(name[len(INTERVAL_PREFIX):])
    except ValueError as exc:
        raise ConfigurationError(f"bad interval buffer in method name {name!r}") from exc


def interval_method_name(buffer: float) -> str:
    return f"{INTERVAL_PREFIX}{buffer:g}"


def deploy_config_for(
    name: str,
    monitor: MonitorConfig,
    *,
    interval_buffer: Optional[float] = None,
    **overrides,
) -> DeployConfig:
    cfg = get_method(name)(monitor, interval_buffer)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


# ── built-in methods ─────────────────────────────────────────────────────────

def _base(mon: MonitorConfig, _buffer: Optional[float] = None) -> DeployConfig:
    return DeployConfig.from_settings(mon, monitor_enabled=False, skew_enabled=False)


def _interval(mon: MonitorConfig, buffer: Optional[float] = None) -> DeployConfig:
    return DeployConfig.from_settings(
        mon,
        monitor_enabled=False,
        skew_enabled=False,
        interval_period=interval_period(mon.mean_length, buffer),
    )


def _ours_no_skew(mon: MonitorConfig, _buffer: Optional[float] = None) -> DeployConfig:
    return DeployConfig.from_settings(mon, monitor_enabled=True, skew_enabled=False)


def _ours_full(mon: MonitorConfig, _buffer: Optional[float] = None) -> DeployConfig:
    return DeployConfig.from_settings(mon, monitor_enabled=True, skew_enabled=True)


register(Method.BASE_NO_RECOVERY.value, _base)
register(Method.INTERVAL_RECOVERY.value, _interval)
register(Method.OURS_NO_SKEW.value, _ours_no_skew)
register(Method.OURS_FULL.value, _ours_full)
