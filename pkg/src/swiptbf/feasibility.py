"""SINR feasibility and the optimal-energy-beamformer (OeBF) feasibility test."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, InfeasibleError, MappingError, PreconditionError
from .model import energy_matrix
from .uplink import UplinkProblem, downlink_beams, iterate_fixed_point

__all__ = [
    "FeasibilityReport",
    "min_power_beams",
    "is_feasible",
    "oebf_feasibility",
    "feasibility_report",
    "DIVERGENCE_CAP",
]

DIVERGENCE_CAP = 1e12


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    feasible: bool
    min_power: float  # W, inf when no power suffices
    min_power_beams: Optional[np.ndarray]
    oebf_powers: Optional[np.ndarray]


def min_power_beams(s, *, fp_tol=1e-12, max_iters=10000):
    """Minimum sum-power beams meeting every SINR target with equality.

    Returns ``(beams, P_min)`` with ``beams`` of shape ``(K_I, M)``.
    Raises ``InfeasibleError`` when no finite power reaches the targets.
    """
    if s.K_I == 0:
        raise PreconditionError("min_power_beams needs at least one ID receiver")
    prob = UplinkProblem.power_minimization(s)
    run = iterate_fixed_point(prob, 1.0, np.zeros(s.K_I), fp_tol=fp_tol, max_iters=max_iters,
                              divergence_cap=DIVERGENCE_CAP)
    try:
        beams, p = downlink_beams(prob, run.receivers)
    except MappingError as exc:
        raise InfeasibleError(f"targets unreachable: {exc}") from exc
    return beams, float(np.sum(p))


def is_feasible(s):
    if s.K_I == 0:
        return True
    try:
        _, p_min = min_power_beams(s)
    except (InfeasibleError, ConvergenceError):
        return False
    return p_min <= s.power


def oebf_feasibility(s, profile=None):
    """Minimal powers ``p`` letting every ID receiver meet its target along ``v_E``.

    All information beams point along the dominant direction ``v_E`` of ``G``;
    returns ``None`` when that is impossible within the budget.
    """
    if s.K_I == 0:
        raise PreconditionError("oebf_feasibility needs at least one ID receiver")
    v_e = (profile or energy_matrix(s)).v_E
    a = np.abs(s.h @ v_e) ** 2
    if np.any(a <= 1e-14 * np.sum(np.abs(s.h) ** 2, axis=1)):
        return None
    k = s.K_I
    D = np.repeat(s.gamma[:, None], k, axis=1)
    np.fill_diagonal(D, 0.0)
    if k > 1 and np.max(np.abs(np.linalg.eigvals(D))) >= 1.0:
        return None
    u = s.gamma * s.sigma2 / a
    p = np.linalg.solve(np.eye(k) - D, u)
    if np.any(p < 0) or np.sum(p) > s.power:
        return None
    return p


def feasibility_report(s, profile=None):
    if s.K_I == 0:
        return FeasibilityReport(True, 0.0, np.zeros((0, s.M), dtype=complex), np.zeros(0))
    try:
        beams, p_min = min_power_beams(s)
    except (InfeasibleError, ConvergenceError):
        return FeasibilityReport(False, float("inf"), None, None)
    feasible = p_min <= s.power
    oebf = oebf_feasibility(s, profile) if feasible else None
    return FeasibilityReport(feasible, p_min, beams, oebf)
