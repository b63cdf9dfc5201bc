"""End-to-end driver: in-process and networked runs, tamper scenarios, benchmarks."""

from .config import HarnessConfig
from .retailer import RetailerCore, Scenario, TamperSpec
from .sim import CycleResult, run_cycle

__all__ = ["HarnessConfig", "RetailerCore", "Scenario", "TamperSpec", "CycleResult", "run_cycle"]
