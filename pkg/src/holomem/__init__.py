"""Non-abelian geometric quantum memory in a four-level atomic ensemble.

Bosonic Fock sectors, dark-state polaritons, the Wilczek-Zee holonomy of
the dark manifold, exact sector dynamics, the write / rotate / read memory
protocol and a brute-force finite-N oracle.
"""
from .errors import (AccuracyWarning, CapacityError, ConfigError, DegenerateScheduleError,
                     DesignError, HolomemError, ProtocolSetupError)
from .model import SystemParams
from .schedules import CycleDesign, Leg, PiecewiseSchedule, SampledSchedule, cycle_for_margin

__all__ = [
    "AccuracyWarning", "CapacityError", "ConfigError", "CycleDesign", "DegenerateScheduleError",
    "DesignError", "HolomemError", "Leg", "PiecewiseSchedule", "ProtocolSetupError",
    "SampledSchedule", "SystemParams", "cycle_for_margin",
]
