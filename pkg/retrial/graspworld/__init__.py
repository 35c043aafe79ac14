"""Hidden-parameter grasp-and-carry world."""

from retrial.graspworld.scenario import HiddenParam, ScenarioConfig, Variant, sample_hidden  # noqa: F401
from retrial.graspworld.world import (  # noqa: F401
    StepOutcome,
    WorldState,
    affordance_positions,
    observe,
    reset,
    run_recovery,
    step,
)
