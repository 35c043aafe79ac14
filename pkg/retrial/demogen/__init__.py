"""Scripted expert demonstrations and dataset files."""

from retrial.demogen.expert import Dataset, expert_action, generate_demos  # noqa: F401
from retrial.demogen.storage import read_dataset, write_dataset  # noqa: F401
