"""LLM-synthesized decision-tree driving policies for a discrete-action highway."""

from treedrive.actions import SPEED_LEVELS, Action

__version__ = "0.1.0"

__all__ = ["Action", "SPEED_LEVELS", "__version__"]
