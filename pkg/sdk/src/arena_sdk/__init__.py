"""Agent SDK: write a class, let the SDK speak the wire protocol.

Agents subclass BaseAgent and implement select_action(observation,
action_mask) -> Optional[int]; serve() runs the newline-delimited JSON
request/reply loop over stdin/stdout. The harness launches agents as
`<interpreter> -m arena_sdk.runner <agent_source_path>`.
"""

from arena_sdk.agent import BaseAgent, serve
from arena_sdk.source_check import CheckReport, Finding, source_check

__all__ = ["BaseAgent", "serve", "source_check", "CheckReport", "Finding"]
__version__ = "0.1.0"
