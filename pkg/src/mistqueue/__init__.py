"""Simulator for a bounded push-out queue whose packets may hide their
work and profit until they are first processed."""

from .engine import run, run_batch
from .model import Arrival, ArrivalBatch, Packet, RunStats, Trace
from .policies import POLICY_NAMES, PolicyConfig
from .traffic import TrafficConfig, generate_trace

__version__ = "0.1.0"

__all__ = ["Arrival", "ArrivalBatch", "Packet", "POLICY_NAMES", "PolicyConfig", "RunStats", "Trace",
           "TrafficConfig", "generate_trace", "run", "run_batch"]
