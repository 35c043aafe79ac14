"""Closed-loop deployment: sample, skew, execute, monitor, recover."""

from retrial.deploy.runner import DeployConfig, EpisodeResult, interval_period, run_episode  # noqa: F401
