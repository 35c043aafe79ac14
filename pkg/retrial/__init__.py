"""retrial – value-guided retrials for a base policy in a hidden-parameter grasp world."""

__version__ = "0.1.0"
