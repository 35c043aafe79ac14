"""Retrieval chunk policy and skewed chunk selection."""

from retrial.policy.retrieval import (  # noqa: F401
    PolicyParams,
    RetrievalPolicy,
    build_policy,
    sample_chunk,
    sample_chunks,
)
from retrial.policy.skew import AvoidanceSet, SkewConfig, record_avoid, skewed_select  # noqa: F401
