"""The low-level communication layer: identities, envelopes, the
deterministic simulated network and the optional TCP frame backend."""

from .ids import (CONTROL_KINDS, Envelope, IdGenerator, Phase, ProcessId,
                  SendReceipt, is_basic)
from .sim import (CrashProcess, DelayEdge, DropNextMessage, FaultScript,
                  Process, ProcessContext, SimNetwork, Topology)

__all__ = [
    "CONTROL_KINDS", "Envelope", "IdGenerator", "Phase", "ProcessId",
    "SendReceipt", "is_basic",
    "CrashProcess", "DelayEdge", "DropNextMessage", "FaultScript",
    "Process", "ProcessContext", "SimNetwork", "Topology",
]
