"""Dual solvers for joint information/energy beamforming.

For a dual price ``beta`` on the power budget the inner problem is
``g(beta) = min sum_i w_i^H (beta*I - G) w_i`` subject to the SINR targets.
It is solved through its dual uplink by a fixed-point power iteration
(``algorithm1`` when ``beta >= xi_E``, ``algorithm2`` below that), and the
outer dual ``beta*P - g(beta)`` is minimized by bisection on its subgradient
``P - sum_i ||w_i||^2``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ClassificationError,
    ConvergenceError,
    InfeasibleError,
    InputError,
    MappingError,
    NonPsdNoiseError,
    PreconditionError,
)
from .feasibility import feasibility_report
from .model import BeamSolution, ReceiverType, Region, SolveReport, energy_matrix
from .uplink import (
    UplinkProblem,
    coupling_system,
    downlink_beams,
    downlink_power_map as _downlink_power_map,
    iterate_fixed_point,
    uplink_step,
)

__all__ = [
    "SolverOptions",
    "UplinkState",
    "PowerCouplingSystem",
    "DualEval",
    "InnerSolution",
    "Unbounded",
    "DualSolver",
    "fixed_point_map",
    "mmse_receivers",
    "power_coupling",
    "downlink_power_map",
    "algorithm1",
    "init_lambda",
    "algorithm2",
    "f1",
    "f2",
    "solve_p1",
    "solve_p2",
    "solve",
    "classify_region",
]


@dataclass(frozen=True)
class SolverOptions:
    fp_tol: float = 1e-9  # relative to max(1, |lambda|)
    bisect_tol: float = 1e-7  # relative to the upper bracket end
    psd_tol: float = 1e-9  # relative to the largest |eigenvalue| of Z_i
    max_fp_iters: int = 10000
    max_bisect_iters: int = 200
    bracket_growth: float = 2.0
    max_inflations: int = 40

    def __post_init__(self):
        for name in ("fp_tol", "bisect_tol", "psd_tol", "max_fp_iters", "max_bisect_iters", "max_inflations"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not self.bracket_growth > 1.0:
            raise InputError("bracket_growth must exceed 1")


@dataclass
class UplinkState:
    beta: float
    lambdas: np.ndarray
    receivers: np.ndarray  # (K_I, M) unit rows


@dataclass
class PowerCouplingSystem:
    D: np.ndarray
    u: np.ndarray


@dataclass
class InnerSolution:
    """Bounded solution of the inner problem at one ``beta``."""

    beams: Optional[np.ndarray]  # (K_I, M); None when the infimum is not attained
    powers: np.ndarray
    state: UplinkState
    iterations: int
    uplink_value: float  # sum_i lambda_i sigma_i^2
    downlink_value: float  # sum_i w_i^H (beta*I - G) w_i
    history: list = field(default_factory=list)

    @property
    def sum_power(self):
        return float(np.sum(self.powers))


@dataclass
class Unbounded:
    """The inner problem is unbounded below at ``beta`` (``g = -inf``)."""

    beta: float
    index: int  # receiver whose noise covariance lost PSD-ness, -1 if unknown
    iterations: int
    history: list = field(default_factory=list)


@dataclass
class DualEval:
    beta: float
    value: float  # +inf when the dual is unbounded at beta
    g_value: float  # -inf when the inner problem is unbounded
    subgradient: float  # nan unless value is finite
    beams: Optional[np.ndarray] = None
    inner: Optional[InnerSolution] = None

    @property
    def finite(self):
        return math.isfinite(self.value)


class DualSolver:
    """Stateful helper binding one scenario to the dual machinery."""

    def __init__(self, s, opts=None, profile=None):
        self.s = s
        self.opts = opts or SolverOptions()
        self.profile = profile or energy_matrix(s)
        self.prob = UplinkProblem.from_scenario(s, self.profile)
        self._at_xi = None

    @property
    def xi_E(self):
        return self.profile.xi_E

    def _fp(self, beta, lam0, record=False):
        o = self.opts
        return iterate_fixed_point(self.prob, beta, lam0, fp_tol=o.fp_tol, psd_tol=o.psd_tol,
                                   max_iters=o.max_fp_iters, record=record)

    def _finish(self, beta, run, strict=False):
        state = UplinkState(beta, run.lambdas, run.receivers)
        try:
            beams, p = downlink_beams(self.prob, run.receivers)
        except MappingError:
            if strict:
                raise
            # at beta = xi_E the infimum can be approached but not attained
            # (receivers collapse onto v_E); the downlink powers run off to
            # infinity, so the subgradient P - sum(p) is -inf
            p = np.full(self.s.K_I, math.inf)
            return InnerSolution(None, p, state, run.iterations, float(run.lambdas @ self.s.sigma2), math.nan,
                                 run.history)
        noise = beta * self.prob.eye - self.prob.G
        down = float(np.real(np.einsum("km,mn,kn->", beams.conj(), noise, beams)))
        return InnerSolution(beams, p, state, run.iterations, float(run.lambdas @ self.s.sigma2), down,
                             run.history)

    def algorithm1(self, beta, lambdas0=None, record=False):
        """Inner problem for ``beta >= xi_E`` by plain fixed-point iteration."""
        xi = self.xi_E
        if beta < xi * (1.0 - self.opts.psd_tol):
            raise PreconditionError(f"algorithm1 needs beta >= xi_E ({beta:.6g} < {xi:.6g})")
        if lambdas0 is None:
            lambdas0 = np.zeros(self.s.K_I)
            # at beta = xi_E the zero start can stall on a spurious fixed point;
            # start from the solution at 2*xi_E, which dominates the target one
            if xi > 0 and beta <= xi * (1.0 + 1e-12) and self.s.K_I > 1:
                lambdas0 = self._fp(2.0 * xi, lambdas0).lambdas
        run = self._fp(beta, lambdas0, record)
        return self._finish(beta, run)

    def lambda_at_xi(self):
        if self._at_xi is None:
            self._at_xi = self.algorithm1(self.xi_E).state.lambdas
        return self._at_xi

    def _dominates(self, lam, beta):
        try:
            m = uplink_step(self.prob, lam, beta, self.opts.psd_tol).values
        except NonPsdNoiseError:
            return False
        return bool(np.all(lam >= m - self.opts.fp_tol * np.maximum(1.0, lam)))

    def init_lambda(self, beta, warm=None):
        """Feasible start for ``algorithm2``: ``lam >= m(lam)`` with every ``Z_i`` PSD.

        Returns ``(lambdas, ok)``; ``ok`` is False when inflation ran out, in
        which case the guard in ``algorithm2`` decides.
        """
        lam = np.array(self.lambda_at_xi() if warm is None else warm, dtype=float)
        for _ in range(self.opts.max_inflations + 1):
            if self._dominates(lam, beta):
                return lam, True
            lam = lam * self.opts.bracket_growth
        return lam, False

    def algorithm2(self, beta, lambdas0, record=False):
        """Inner problem for ``0 <= beta < xi_E``; returns ``InnerSolution`` or ``Unbounded``."""
        if not 0.0 <= beta < self.xi_E:
            raise PreconditionError("algorithm2 needs 0 <= beta < xi_E")
        try:
            run = self._fp(beta, lambdas0, record)
        except NonPsdNoiseError as exc:
            return Unbounded(beta, exc.index, 0)
        try:
            return self._finish(beta, run, strict=True)
        except MappingError:
            return Unbounded(beta, -1, run.iterations, run.history)

    def inner(self, beta, warm=None, record=False):
        if beta >= self.xi_E:
            return self.algorithm1(beta, warm, record)
        lam0, _ = self.init_lambda(beta, warm)
        return self.algorithm2(beta, lam0, record)

    def f1(self, beta, warm=None):
        if beta < 0:
            raise PreconditionError("beta must be non-negative")
        res = self.inner(beta, warm)
        if isinstance(res, Unbounded):
            return DualEval(beta, math.inf, -math.inf, math.nan)
        g = res.uplink_value
        return DualEval(beta, beta * self.s.power - g, g, self.s.power - res.sum_power, res.beams, res)

    def f2(self, beta, warm=None):
        if beta < 0:
            raise PreconditionError("beta must be non-negative")
        if beta < self.xi_E:
            return DualEval(beta, math.inf, math.nan, math.nan)
        return self.f1(beta, warm)

    # outer problems -----------------------------------------------------

    def _energy_only(self, rtype, iterations=0):
        s, prof = self.s, self.profile
        w = np.zeros((s.K_I, s.M), dtype=complex)
        sol = BeamSolution(w, np.sqrt(s.power) * prof.v_E[None, :], rtype)
        return SolveReport.from_solution(sol, s, beta=prof.xi_E, lambdas=np.zeros(s.K_I), q=s.power,
                                         iterations=iterations, region=Region.R3,
                                         dual_value=prof.xi_E * s.power, oebf_feasible=True, profile=prof)

    def _oebf_report(self, p, rtype):
        s, prof = self.s, self.profile
        # spread the whole budget over the OeBF direction in proportion to p
        scale = np.sqrt(s.power * p / np.sum(p))
        sol = BeamSolution(scale[:, None] * prof.v_E[None, :], None, rtype)
        return SolveReport.from_solution(sol, s, beta=prof.xi_E, lambdas=np.zeros(s.K_I), q=0.0,
                                         iterations=0, region=Region.R3, dual_value=prof.xi_E * s.power,
                                         oebf_feasible=True, profile=prof)

    def _bisect(self, lo):
        o = self.opts
        hi = 2.0 * self.xi_E
        ev_hi = self.f1(hi)
        growths = 0
        while not (ev_hi.finite and ev_hi.subgradient > 0):
            if growths >= o.max_bisect_iters:
                raise ConvergenceError("could not bracket the optimal dual price")
            warm = ev_hi.inner.state.lambdas if ev_hi.finite else None
            hi *= o.bracket_growth
            ev_hi = self.f1(hi, warm)
            growths += 1
        it = 0
        while hi - lo > o.bisect_tol * hi:
            if it >= o.max_bisect_iters:
                raise ConvergenceError("bisection did not converge")
            it += 1
            mid = 0.5 * (lo + hi)
            ev = self.f1(mid, ev_hi.inner.state.lambdas)
            if not ev.finite or ev.subgradient < 0:
                lo = mid
            else:
                hi, ev_hi = mid, ev
        return ev_hi, it + growths

    def _prepare(self, rtype):
        s = self.s
        if s.K_I == 0:
            return self._energy_only(rtype)
        rep = feasibility_report(s, self.profile)
        if not rep.feasible:
            raise InfeasibleError(f"SINR targets need {rep.min_power:.6g} W, budget is {s.power:.6g} W")
        if self.xi_E <= 0.0:
            beams = rep.min_power_beams * math.sqrt(s.power / rep.min_power)
            sol = BeamSolution(beams, None, rtype)
            return SolveReport.from_solution(sol, s, beta=0.0, lambdas=np.zeros(s.K_I), q=0.0, iterations=0,
                                             dual_value=0.0, profile=self.profile)
        if rep.oebf_powers is not None:
            return self._oebf_report(rep.oebf_powers, rtype)
        return None

    def solve_p1(self):
        """Type I receivers: no dedicated energy beam, full budget on information beams."""
        done = self._prepare(ReceiverType.TYPE_I)
        if done is not None:
            return done
        ev, iters = self._bisect(0.0)
        s = self.s
        beams = ev.beams * math.sqrt(s.power / ev.inner.sum_power)
        sol = BeamSolution(beams, None, ReceiverType.TYPE_I)
        return SolveReport.from_solution(sol, s, beta=ev.beta, lambdas=ev.inner.state.lambdas, q=0.0,
                                         iterations=iters, dual_value=ev.value, profile=self.profile)

    def solve_p2(self):
        """Type II receivers: leftover budget goes to one energy beam along ``v_E``."""
        done = self._prepare(ReceiverType.TYPE_II)
        if done is not None:
            return done
        ev, iters = self._bisect(self.xi_E)
        s = self.s
        q = max(s.power - ev.inner.sum_power, 0.0)
        energy = math.sqrt(q) * self.profile.v_E[None, :] if q > 0 else None
        sol = BeamSolution(ev.beams, energy, ReceiverType.TYPE_II)
        return SolveReport.from_solution(sol, s, beta=ev.beta, lambdas=ev.inner.state.lambdas, q=q,
                                         iterations=iters, dual_value=ev.value, profile=self.profile)


def _solver(s, opts):
    return DualSolver(s, opts)


def fixed_point_map(lambdas, beta, s, opts=None):
    """``lam'_i = gamma_i / (h_i Z_i^+ h_i^H)``; raises ``NonPsdNoiseError`` on a non-PSD ``Z_i``."""
    opts = opts or SolverOptions()
    prob = UplinkProblem.from_scenario(s)
    return uplink_step(prob, np.asarray(lambdas, dtype=float), beta, opts.psd_tol).values


def mmse_receivers(lambdas, beta, s, opts=None):
    """Unit MMSE receivers ``Z_i^+ h_i^H / ||.||`` as rows."""
    opts = opts or SolverOptions()
    prob = UplinkProblem.from_scenario(s)
    return uplink_step(prob, np.asarray(lambdas, dtype=float), beta, opts.psd_tol).receivers


def power_coupling(receivers, s):
    D, u = coupling_system(UplinkProblem.from_scenario(s), np.asarray(receivers, dtype=complex))
    return PowerCouplingSystem(D, u)


def downlink_power_map(receivers, s):
    return _downlink_power_map(UplinkProblem.from_scenario(s), np.asarray(receivers, dtype=complex))


def algorithm1(beta, s, opts=None, lambdas0=None):
    return _solver(s, opts).algorithm1(beta, lambdas0)


def init_lambda(beta, s, opts=None, warm=None):
    lam, _ = _solver(s, opts).init_lambda(beta, warm)
    return lam


def algorithm2(beta, s, lambdas0, opts=None, record=False):
    return _solver(s, opts).algorithm2(beta, np.asarray(lambdas0, dtype=float), record)


def f1(beta, s, opts=None):
    return _solver(s, opts).f1(beta)


def f2(beta, s, opts=None):
    return _solver(s, opts).f2(beta)


def solve_p1(s, opts=None):
    return _solver(s, opts).solve_p1()


def solve_p2(s, opts=None):
    return _solver(s, opts).solve_p2()


def classify_region(s, report_p1, report_p2, tol=1e-5):
    """Label the SINR regime from the Type I and Type II solutions."""
    v1, v2 = report_p1.objective, report_p2.objective
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise ClassificationError("reports must have finite objectives")
    if report_p1.oebf_feasible or report_p2.oebf_feasible:
        return Region.R3
    scale = max(abs(v1), np.finfo(float).tiny)
    gap = (v2 - v1) / scale
    if gap < -tol:
        raise ClassificationError(f"Type II value {v2:.9g} below Type I value {v1:.9g}")
    if gap > tol:
        if report_p2.energy_beam_power > tol * s.power:
            return Region.R2
        raise ClassificationError("strict value gap without a dedicated energy beam")
    bound = energy_matrix(s).xi_E * s.power
    if abs(v1 - bound) <= tol * bound and abs(v2 - bound) <= tol * bound:
        return Region.R3
    return Region.R1


def solve(s, opts=None):
    """Solve both receiver types and attach the region label to each report."""
    solver = _solver(s, opts)
    r1 = solver.solve_p1()
    r2 = solver.solve_p2()
    region = classify_region(s, r1, r2)
    r1.region = region
    r2.region = region
    return r1, r2
