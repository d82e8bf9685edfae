"""Dual-uplink kernel shared by the feasibility checks and the dual solvers.

The dual uplink sees receiver ``i`` through the effective noise covariance
``Z_i = sum_{k != i} lam_k h_k^H h_k + beta*I - G``, which may be indefinite.
Everything here is batched over the ``K_I`` receivers.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleError, MappingError, NonPsdNoiseError
from .model import energy_matrix

__all__ = [
    "UplinkProblem",
    "UplinkStep",
    "FixedPointRun",
    "noise_covariances",
    "uplink_step",
    "iterate_fixed_point",
    "newton_candidate",
    "coupling_system",
    "downlink_power_map",
    "downlink_beams",
]

_NULL_ENERGY_TOL = 1e-14


class UplinkProblem:
    """Channels, targets and the energy matrix for one dual uplink."""

    def __init__(self, h, gamma, sigma2, G):
        self.h = np.asarray(h, dtype=complex)
        self.gamma = np.asarray(gamma, dtype=float)
        self.sigma2 = np.asarray(sigma2, dtype=float)
        self.G = np.asarray(G, dtype=complex)
        k, m = self.h.shape
        self.grams = np.einsum("ki,kj->kij", self.h.conj(), self.h)
        self.eye = np.eye(m)
        self.h_norm2 = np.sum(np.abs(self.h) ** 2, axis=1)

    @property
    def size(self):
        return self.h.shape[0]

    @classmethod
    def from_scenario(cls, s, profile=None):
        profile = profile or energy_matrix(s)
        return cls(s.h, s.gamma, s.sigma2, profile.G)

    @classmethod
    def power_minimization(cls, s):
        """Unit-noise uplink dual to plain sum-power minimization (``beta=1, G=0``)."""
        return cls(s.h, s.gamma, s.sigma2, np.zeros((s.M, s.M), dtype=complex))


@dataclass
class UplinkStep:
    values: np.ndarray  # m_i(lam)
    receivers: np.ndarray  # (K, M) unit rows, receiver i is receivers[i]
    min_eigs: np.ndarray  # smallest eigenvalue of each Z_i


@dataclass
class FixedPointRun:
    lambdas: np.ndarray
    receivers: np.ndarray
    iterations: int
    history: list  # lambda iterates, filled only when requested


def noise_covariances(prob, lambdas, beta):
    lam = np.asarray(lambdas, dtype=float)
    total = np.tensordot(lam, prob.grams, axes=1)
    return total[None] - lam[:, None, None] * prob.grams + (beta * prob.eye - prob.G)[None]


def uplink_step(prob, lambdas, beta, psd_tol=1e-9):
    """One evaluation of ``m_i(lam) = gamma_i / (h_i Z_i^+ h_i^H)`` plus MMSE receivers.

    If ``h_i`` has energy in the null space of ``Z_i`` the quotient can be driven
    to zero; ``m_i`` is then 0 and the receiver is the projection of ``h_i^H``
    onto that null space.
    """
    Z = noise_covariances(prob, lambdas, beta)
    w, V = np.linalg.eigh(Z)
    scale = np.maximum(np.max(np.abs(w), axis=1), np.finfo(float).tiny)
    bad = w[:, 0] < -psd_tol * scale
    if bad.any():
        i = int(np.argmax(bad))
        raise NonPsdNoiseError(i, float(w[i, 0]))
    coef = np.einsum("kmn,km->kn", V.conj(), prob.h.conj())
    energy = np.abs(coef) ** 2
    keep = w > (1e-10 * w.shape[1]) * scale[:, None]
    safe_w = np.where(keep, w, 1.0)
    quad = np.sum(np.where(keep, energy / safe_w, 0.0), axis=1)
    null_energy = np.sum(np.where(keep, 0.0, energy), axis=1)
    in_null = null_energy > _NULL_ENERGY_TOL * prob.h_norm2

    weights = np.where(in_null[:, None], np.where(keep, 0.0, coef), np.where(keep, coef / safe_w, 0.0))
    rx = np.einsum("kmn,kn->km", V, weights)
    norms = np.linalg.norm(rx, axis=1)
    norms[norms == 0.0] = 1.0
    rx = rx / norms[:, None]

    values = np.zeros_like(quad)
    ok = ~in_null & (quad > 0)
    values[ok] = prob.gamma[ok] / quad[ok]
    values[~in_null & (quad <= 0)] = np.inf
    return UplinkStep(values=values, receivers=rx, min_eigs=w[:, 0])


def newton_candidate(prob, beta, step):
    """Uplink powers that make every SINR tight for the receivers in ``step``.

    With receivers frozen the map is affine, ``m(lam) = B lam + c``; the
    candidate is ``(I - B)^{-1} c``.  Because ``m`` is concave this is a
    Newton step on ``lam = m(lam)``: from a dominating start it never drops
    below the largest fixed point and it lands on a dominating point again.
    Returns ``None`` when ``I - B`` has no nonnegative inverse.
    """
    rx = step.receivers
    gains = np.abs(rx @ prob.h.T) ** 2  # [i, k] = |h_k w_i|^2
    own = np.diag(gains).copy()
    if np.any(own <= 0):
        return None
    B = prob.gamma[:, None] * gains / own[:, None]
    np.fill_diagonal(B, 0.0)
    noise = beta * prob.eye - prob.G
    c = prob.gamma * np.real(np.einsum("km,mn,kn->k", rx.conj(), noise, rx)) / own
    k = B.shape[0]
    if k > 1 and np.max(np.abs(np.linalg.eigvals(B))) >= 1.0:
        return None
    lam = np.linalg.solve(np.eye(k) - B, c)
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        return None
    return np.minimum(lam, step.values)


def iterate_fixed_point(prob, beta, lambdas0, *, fp_tol=1e-9, psd_tol=1e-9, max_iters=10000,
                        divergence_cap=None, record=False, accelerate=True):
    """Run ``lam <- m(lam)`` to a fixed point.

    Stops when ``|lam_new - lam| <= fp_tol * max(1, |lam|)`` componentwise.
    With ``accelerate`` each plain step is replaced by ``newton_candidate``
    whenever that is available.  ``divergence_cap`` (a multiple of the first
    iterate) turns runaway growth into ``InfeasibleError``.
    ``NonPsdNoiseError`` propagates to the caller.
    """
    lam = np.array(lambdas0, dtype=float)
    history = [lam.copy()] if record else []
    cap = None
    for n in range(1, max_iters + 1):
        step = uplink_step(prob, lam, beta, psd_tol)
        new = step.values
        if not np.all(np.isfinite(new)):
            raise InfeasibleError("uplink quotient vanished; targets unreachable")
        if accelerate:
            cand = newton_candidate(prob, beta, step)
            if cand is not None:
                new = cand
        if record:
            history.append(new.copy())
        if divergence_cap is not None:
            if cap is None:
                cap = divergence_cap * max(float(np.max(new)), np.finfo(float).tiny)
            elif np.max(new) > cap:
                raise InfeasibleError("uplink powers diverge; SINR targets are interference-limited")
        done = np.all(np.abs(new - lam) <= fp_tol * np.maximum(1.0, np.abs(lam)))
        lam = new
        if done:
            step = uplink_step(prob, lam, beta, psd_tol)
            return FixedPointRun(lam, step.receivers, n, history)
    raise ConvergenceError(f"fixed point not reached in {max_iters} iterations")


def coupling_system(prob, receivers):
    """``D`` and ``u`` of the tight downlink power-control system for given receivers."""
    gains = np.abs(prob.h @ receivers.T) ** 2  # [i, k] = |h_i w_k|^2
    signal = np.diag(gains).copy()
    if np.any(signal <= 0):
        raise MappingError("a receiver is orthogonal to its own channel")
    D = prob.gamma[:, None] * gains / signal[:, None]
    np.fill_diagonal(D, 0.0)
    u = prob.gamma * prob.sigma2 / signal
    return D, u


def downlink_power_map(prob, receivers):
    """Powers ``p = (I - D)^{-1} u`` making every downlink SINR tight."""
    D, u = coupling_system(prob, receivers)
    k = D.shape[0]
    if k and np.max(np.abs(np.linalg.eigvals(D))) >= 1.0:
        raise MappingError("coupling matrix has spectral radius >= 1")
    p = np.linalg.solve(np.eye(k) - D, u)
    if np.any(p < 0):
        raise MappingError("downlink power map produced negative powers")
    return p


def downlink_beams(prob, receivers):
    p = downlink_power_map(prob, receivers)
    return np.sqrt(p)[:, None] * receivers, p
