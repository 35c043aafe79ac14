"""Value functions trained from demonstrations: scalar return and categorical progress."""

from retrial.valuefn.targets import categorical_target, scalar_target  # noqa: F401
from retrial.valuefn.train import TrainConfig, ValueModel, predict, predict_batch  # noqa: F401
