"""System model: scenario data, energy matrix, SINR and harvested power."""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InputError
from .linalg import dominant_eigpair, hermitize

__all__ = [
    "ReceiverType",
    "Region",
    "Scenario",
    "EnergyProfile",
    "BeamSolution",
    "SolveReport",
    "energy_matrix",
    "sinr",
    "sinrs",
    "harvested_power",
    "objective_value",
    "total_power",
    "validate_solution",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watt",
]

DEFAULT_FEAS_TOL = 1e-6


class ReceiverType(Enum):
    TYPE_I = 1  # cannot cancel energy-beam interference
    TYPE_II = 2  # cancels energy-beam interference

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("TYPE", "").replace("_", "")
        if text in ("1", "I"):
            return cls.TYPE_I
        if text in ("2", "II"):
            return cls.TYPE_II
        raise InputError(f"unknown receiver type {value!r}")


class Region(Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    NA = "NA"


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Scenario:
    """One downlink instance. Channels are stored as rows (``h[i] @ w``)."""

    h: np.ndarray  # (K_I, M) complex
    g: np.ndarray  # (K_E, M) complex
    sigma2: np.ndarray  # (K_I,) W
    gamma: np.ndarray  # (K_I,) linear
    alpha: np.ndarray  # (K_E,)
    zeta: float = 1.0
    power: float = 1.0  # W

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        g = np.atleast_2d(np.asarray(self.g, dtype=complex))
        if h.size == 0:
            h = h.reshape(0, g.shape[1] if g.size else 0)
        if g.size == 0:
            g = g.reshape(0, h.shape[1])
        k_i, m = h.shape
        k_e = g.shape[0]
        if g.shape[1] != m:
            raise InputError(f"channel widths differ: h has {m}, g has {g.shape[1]}")
        if m < 1:
            raise InputError("need at least one transmit antenna")
        if k_i + k_e == 0:
            raise InputError("need at least one receiver")
        sigma2 = np.broadcast_to(np.asarray(self.sigma2, dtype=float), (k_i,))
        gamma = np.broadcast_to(np.asarray(self.gamma, dtype=float), (k_i,))
        alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (k_e,))
        for name, arr in (("h", h), ("g", g), ("sigma2", sigma2), ("gamma", gamma), ("alpha", alpha)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} has non-finite entries")
        if np.any(sigma2 <= 0):
            raise InputError("noise powers must be positive")
        if np.any(gamma <= 0):
            raise InputError("SINR targets must be positive")
        if np.any(alpha < 0):
            raise InputError("energy weights must be non-negative")
        if not (0.0 < float(self.zeta) <= 1.0):
            raise InputError("harvest efficiency zeta must lie in (0, 1]")
        if not float(self.power) > 0.0:
            raise InputError("power budget must be positive")
        object.__setattr__(self, "h", _frozen(h, complex))
        object.__setattr__(self, "g", _frozen(g, complex))
        object.__setattr__(self, "sigma2", _frozen(sigma2, float))
        object.__setattr__(self, "gamma", _frozen(gamma, float))
        object.__setattr__(self, "alpha", _frozen(alpha, float))
        object.__setattr__(self, "zeta", float(self.zeta))
        object.__setattr__(self, "power", float(self.power))

    @property
    def M(self):
        return self.h.shape[1]

    @property
    def K_I(self):
        return self.h.shape[0]

    @property
    def K_E(self):
        return self.g.shape[0]

    def with_gamma(self, gamma):
        return replace(self, gamma=gamma)

    def with_power(self, power):
        return replace(self, power=power)


@dataclass(frozen=True, eq=False)
class EnergyProfile:
    G: np.ndarray
    xi_E: float
    v_E: np.ndarray


def energy_matrix(s):
    """``G = zeta * sum_j alpha_j g_j^H g_j`` and its dominant eigenpair."""
    m = s.M
    if s.K_E == 0:
        G = np.zeros((m, m), dtype=complex)
    else:
        weighted = s.g.conj().T * (s.zeta * s.alpha)
        G = hermitize(weighted @ s.g)
    xi, v = dominant_eigpair(G)
    return EnergyProfile(G=G, xi_E=max(xi, 0.0), v_E=v)


@dataclass(frozen=True, eq=False)
class BeamSolution:
    info_beams: np.ndarray  # (K_I, M), row i is w_i
    energy_beams: np.ndarray = field(default=None)  # (n, M), may be empty
    receiver_type: ReceiverType = ReceiverType.TYPE_I

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.info_beams, dtype=complex))
        m = w.shape[1]
        if self.energy_beams is None:
            v = np.zeros((0, m), dtype=complex)
        else:
            v = np.asarray(self.energy_beams, dtype=complex)
            v = v.reshape(-1, m) if v.size else np.zeros((0, m), dtype=complex)
        object.__setattr__(self, "info_beams", w)
        object.__setattr__(self, "energy_beams", v)
        object.__setattr__(self, "receiver_type", ReceiverType.parse(self.receiver_type))

    def scaled(self, factor):
        return BeamSolution(self.info_beams * factor, self.energy_beams * factor, self.receiver_type)


def total_power(sol):
    return float(np.sum(np.abs(sol.info_beams) ** 2) + np.sum(np.abs(sol.energy_beams) ** 2))


def _check_index(i, n, what):
    if not 0 <= i < n:
        raise IndexError(f"{what} index {i} out of range [0, {n})")


def sinrs(sol, s, receiver_type=None):
    """Vector of downlink SINRs for every ID receiver."""
    rtype = ReceiverType.parse(receiver_type) if receiver_type is not None else sol.receiver_type
    gains = np.abs(s.h @ sol.info_beams.T) ** 2  # [i, k] = |h_i w_k|^2
    signal = np.diag(gains)
    interf = gains.sum(axis=1) - signal
    if rtype is ReceiverType.TYPE_I and sol.energy_beams.shape[0]:
        interf = interf + np.sum(np.abs(s.h @ sol.energy_beams.T) ** 2, axis=1)
    return signal / (interf + s.sigma2)


def sinr(sol, s, i, receiver_type=None):
    _check_index(i, s.K_I, "ID receiver")
    return float(sinrs(sol, s, receiver_type)[i])


def harvested_power(sol, s, j):
    """Power ``Q_j`` harvested by EH receiver ``j`` (W)."""
    _check_index(j, s.K_E, "EH receiver")
    gj = s.g[j]
    total = np.sum(np.abs(sol.info_beams @ gj) ** 2) + np.sum(np.abs(sol.energy_beams @ gj) ** 2)
    return float(s.zeta * total)


def objective_value(sol, s, profile=None):
    """Weighted sum harvested power ``sum_i w_i^H G w_i + sum_j v_j^H G v_j``."""
    G = (profile or energy_matrix(s)).G
    beams = np.vstack([sol.info_beams, sol.energy_beams]) if sol.energy_beams.size else sol.info_beams
    return float(np.real(np.einsum("km,mn,kn->", beams.conj(), G, beams)))


def validate_solution(sol, s, tol=DEFAULT_FEAS_TOL):
    """List constraint violations; empty means feasible within ``tol`` (relative)."""
    problems = []
    if sol.info_beams.shape != (s.K_I, s.M):
        problems.append(f"info beams have shape {sol.info_beams.shape}, expected {(s.K_I, s.M)}")
        return problems
    if s.K_I:
        achieved = sinrs(sol, s)
        for i, (got, want) in enumerate(zip(achieved, s.gamma)):
            if got < want * (1.0 - tol):
                problems.append(f"SINR[{i}] = {got:.6g} below target {want:.6g}")
    p = total_power(sol)
    if p > s.power * (1.0 + tol):
        problems.append(f"total power {p:.6g} W exceeds budget {s.power:.6g} W")
    return problems


@dataclass
class SolveReport:
    objective: float
    per_id_sinr: np.ndarray
    per_eh_power: np.ndarray
    total_power: float
    dual_beta: float
    uplink_lambdas: np.ndarray
    energy_beam_power: float
    region: Region
    iterations: int
    solution: BeamSolution
    dual_value: float = float("nan")
    oebf_feasible: bool = False

    @classmethod
    def from_solution(cls, sol, s, *, beta, lambdas, q, iterations, region=Region.NA,
                      dual_value=float("nan"), oebf_feasible=False, profile=None):
        per_eh = np.array([harvested_power(sol, s, j) for j in range(s.K_E)])
        return cls(
            objective=objective_value(sol, s, profile),
            per_id_sinr=sinrs(sol, s) if s.K_I else np.zeros(0),
            per_eh_power=per_eh,
            total_power=total_power(sol),
            dual_beta=float(beta),
            uplink_lambdas=np.asarray(lambdas, dtype=float),
            energy_beam_power=float(q),
            region=region,
            iterations=int(iterations),
            solution=sol,
            dual_value=float(dual_value),
            oebf_feasible=bool(oebf_feasible),
        )

    def to_dict(self):
        def beams(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in a]

        return {
            "receiver_type": self.solution.receiver_type.value,
            "objective_w": self.objective,
            "per_id_sinr": [float(x) for x in self.per_id_sinr],
            "per_eh_power_w": [float(x) for x in self.per_eh_power],
            "total_power_w": self.total_power,
            "dual_beta": self.dual_beta,
            "dual_value_w": self.dual_value,
            "uplink_lambdas": [float(x) for x in self.uplink_lambdas],
            "energy_beam_power_w": self.energy_beam_power,
            "region": self.region.value,
            "iterations": self.iterations,
            "oebf_feasible": self.oebf_feasible,
            "info_beams": beams(self.solution.info_beams),
            "energy_beams": beams(self.solution.energy_beams),
        }
