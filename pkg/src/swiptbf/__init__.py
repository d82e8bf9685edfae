"""Joint information and energy beamforming for multi-user SWIPT downlinks."""

from .model import BeamSolution, ReceiverType, Region, Scenario, SolveReport, energy_matrix

__all__ = ["BeamSolution", "ReceiverType", "Region", "Scenario", "SolveReport", "energy_matrix"]
__version__ = "0.1.0"
