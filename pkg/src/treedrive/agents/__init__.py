"""Planner, Coder and Summarizer agents and the training loop that connects them."""

from treedrive.agents.client import (
    ChatClient,
    ChatError,
    HTTPChatClient,
    Message,
    RecordingChatClient,
    ReplayChatClient,
    ReplayExhausted,
)
from treedrive.agents.loop import (
    Agents,
    CoderOutput,
    IterationSummary,
    TrainConfig,
    TrainResult,
    Transcript,
    TranscriptEntry,
    train,
)
from treedrive.agents.models import (
    AgentFormatError,
    CoderFormatError,
    Critique,
    PlannerFormatError,
    SummarizerFormatError,
    Tactic,
    TacticSet,
)

__all__ = [
    "AgentFormatError",
    "Agents",
    "ChatClient",
    "ChatError",
    "CoderFormatError",
    "CoderOutput",
    "Critique",
    "HTTPChatClient",
    "IterationSummary",
    "Message",
    "PlannerFormatError",
    "RecordingChatClient",
    "ReplayChatClient",
    "ReplayExhausted",
    "SummarizerFormatError",
    "Tactic",
    "TacticSet",
    "TrainConfig",
    "TrainResult",
    "Transcript",
    "TranscriptEntry",
    "train",
]
