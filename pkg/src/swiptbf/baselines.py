"""Separate information/energy designs used as reference points.

Both start from the minimum sum-power information beams and hand the
leftover budget to a single energy beam.  The Type I variant keeps that beam
in the null space of all ID channels; the Type II variant points it along
the dominant direction of ``G``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ApplicabilityError, InfeasibleError
from .feasibility import min_power_beams
from .linalg import dominant_eigpair, null_space_basis
from .model import BeamSolution, ReceiverType, energy_matrix, objective_value

__all__ = ["BaselineResult", "separate_design_type1", "separate_design_type2"]


@dataclass(frozen=True, eq=False)
class BaselineResult:
    solution: BeamSolution
    objective: float
    residual_power: float


def _info_beams(s):
    if s.K_I == 0:
        return np.zeros((0, s.M), dtype=complex), s.power
    beams, p_min = min_power_beams(s)
    if p_min > s.power:
        raise InfeasibleError(f"SINR targets need {p_min:.6g} W, budget is {s.power:.6g} W")
    return beams, s.power - p_min


def separate_design_type1(s):
    """Minimum-power information beams plus a zero-interference energy beam."""
    if s.K_I > s.M - 1:
        raise ApplicabilityError(f"needs K_I <= M - 1, got K_I={s.K_I}, M={s.M}")
    prof = energy_matrix(s)
    beams, residual = _info_beams(s)
    if s.K_I:
        basis = null_space_basis(s.h)
        _, direction = dominant_eigpair(basis.conj().T @ prof.G @ basis)
        energy_dir = basis @ direction
    else:
        energy_dir = prof.v_E
    energy = np.sqrt(residual) * energy_dir[None, :]
    sol = BeamSolution(beams, energy, ReceiverType.TYPE_I)
    return BaselineResult(sol, objective_value(sol, s, prof), residual)


def separate_design_type2(s):
    """Minimum-power information beams plus an energy beam along ``v_E``."""
    prof = energy_matrix(s)
    beams, residual = _info_beams(s)
    energy = np.sqrt(residual) * prof.v_E[None, :]
    sol = BeamSolution(beams, energy, ReceiverType.TYPE_II)
    return BaselineResult(sol, objective_value(sol, s, prof), residual)
