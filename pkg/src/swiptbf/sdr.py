"""Semidefinite relaxations of the beamforming problems, solved as an oracle.

Each complex ``M x M`` covariance is carried as a real ``2M x 2M`` block; a
Hermitian coefficient ``A`` enters as ``embed(A)/2`` so that
``<embed(A)/2, X> = tr(A W)`` for the covariance ``W`` that ``X`` encodes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, RankError
from .linalg import fix_phase, hermitize, outer, psd_dominance_check
from .model import ReceiverType, energy_matrix
from .sdp import RealSdp, StandardSdp, embed_complex, interior_point, solve_real_sdp, unembed_complex

__all__ = [
    "SdrSolution",
    "KktMatrices",
    "StructureReport",
    "build_sdr1",
    "build_sdr2",
    "build_sdr",
    "build_inner_sdr",
    "build_min_power_sdr",
    "solve_sdr",
    "kkt_matrices",
    "dominant_ratio",
    "extract_rank_one",
    "verify_structure",
    "dual_feasibility_check",
    "dual_lmi_margin",
]


def _half(a):
    return 0.5 * embed_complex(hermitize(a))


def _add_sinr_rows(p, s, info_blocks, energy_block=None):
    for i in range(s.K_I):
        hi = outer(s.h[i])
        terms = {}
        for k, blk in enumerate(info_blocks):
            terms[blk] = _half(hi / s.gamma[i] if k == i else -hi)
        if energy_block is not None:
            terms[energy_block] = _half(-hi)
        p.add_constraint(terms, ">=", s.sigma2[i], name=f"sinr{i}")


def build_sdr(s, receiver_type):
    """Relaxation of the joint design: blocks ``W_1..W_K`` then ``W_E``.

    Rows ``0..K_I-1`` are the SINR constraints and the last row is the power
    budget.  Type I rows charge the energy covariance as interference.
    """
    rtype = ReceiverType.parse(receiver_type)
    prof = energy_matrix(s)
    m = s.M
    p = RealSdp()
    info = [p.add_block(2 * m, f"W{i}") for i in range(s.K_I)]
    energy = p.add_block(2 * m, "WE")
    for blk in info + [energy]:
        p.set_objective(blk, _half(prof.G))
    _add_sinr_rows(p, s, info, energy if rtype is ReceiverType.TYPE_I else None)
    eye = _half(np.eye(m))
    p.add_constraint({blk: eye for blk in info + [energy]}, "<=", s.power, name="power")
    p.label = rtype
    return p


def build_sdr1(s):
    return build_sdr(s, ReceiverType.TYPE_I)


def build_sdr2(s):
    return build_sdr(s, ReceiverType.TYPE_II)


def build_inner_sdr(s, beta):
    """Relaxed inner problem: ``max -sum_i tr((beta*I - G) W_i)`` under the SINR rows.

    Its optimal value is ``-g(beta)``; it is unbounded exactly when ``g(beta) = -inf``.
    """
    prof = energy_matrix(s)
    p = RealSdp()
    info = [p.add_block(2 * s.M, f"W{i}") for i in range(s.K_I)]
    cost = _half(prof.G - beta * np.eye(s.M))
    for blk in info:
        p.set_objective(blk, cost)
    _add_sinr_rows(p, s, info)
    return p


def build_min_power_sdr(s):
    """Relaxed sum-power minimization (as ``max -sum_i tr(W_i)``)."""
    p = RealSdp()
    info = [p.add_block(2 * s.M, f"W{i}") for i in range(s.K_I)]
    for blk in info:
        p.set_objective(blk, _half(-np.eye(s.M)))
    _add_sinr_rows(p, s, info)
    return p


@dataclass
class SdrSolution:
    W: list  # complex covariances, one per ID receiver
    W_E: np.ndarray  # energy covariance (zeros when the problem has none)
    value: float
    dual_value: float
    lambdas: np.ndarray
    beta: float
    receiver_type: ReceiverType
    status: str
    gap: float
    primal_residual: float
    dual_residual: float
    duals: list = field(default_factory=list)  # complex dual slack per block


def solve_sdr(p, tol=1e-10):
    """Solve a relaxation built by this module and unpack the complex covariances."""
    rtype = p.label if isinstance(p.label, ReceiverType) else ReceiverType.TYPE_II
    sol = solve_real_sdp(p, tol=tol)
    covs = [unembed_complex(x) for x in sol.X]
    duals = [2.0 * unembed_complex(z) for z in sol.Z]
    n_info = sum(1 for n in p.names if n.startswith("W") and n != "WE")
    has_energy = "WE" in p.names
    m = covs[0].shape[0]
    w_e = covs[n_info] if has_energy else np.zeros((m, m), dtype=complex)
    sinr_rows = [i for i, r in enumerate(p.rows) if r.name.startswith("sinr")]
    power_rows = [i for i, r in enumerate(p.rows) if r.name == "power"]
    beta = float(sol.multipliers[power_rows[0]]) if power_rows else float("nan")
    return SdrSolution(
        W=covs[:n_info],
        W_E=w_e,
        value=sol.value,
        dual_value=sol.dual_value,
        lambdas=np.asarray(sol.multipliers[sinr_rows], dtype=float),
        beta=beta,
        receiver_type=rtype,
        status=sol.status,
        gap=sol.gap,
        primal_residual=sol.primal_residual,
        dual_residual=sol.dual_residual,
        duals=duals,
    )


@dataclass
class KktMatrices:
    A: list  # per ID receiver
    C1: np.ndarray  # energy block, Type I
    C2: np.ndarray  # energy block, Type II


def kkt_matrices(s, lambdas, beta):
    G = energy_matrix(s).G
    grams = [outer(row) for row in s.h]
    total = sum((lam * h for lam, h in zip(lambdas, grams)), np.zeros_like(G))
    eye = np.eye(s.M)
    A = [G + lambdas[i] * grams[i] / s.gamma[i] - (total - lambdas[i] * grams[i]) - beta * eye
         for i in range(s.K_I)]
    return KktMatrices(A=A, C1=G - total - beta * eye, C2=G - beta * eye)


def dominant_ratio(w):
    vals = np.linalg.eigvalsh(hermitize(w))
    tr = float(np.sum(vals))
    return float(vals[-1] / tr) if tr > 0 else 0.0


def extract_rank_one(w, tol=1e-4):
    """Beam ``sqrt(l1) v1`` from a covariance whose dominant ratio is at least ``1 - tol``."""
    vals, vecs = np.linalg.eigh(hermitize(w))
    tr = float(np.sum(vals))
    if tr <= 0:
        return np.zeros(w.shape[0], dtype=complex)
    ratio = vals[-1] / tr
    if ratio < 1.0 - tol:
        raise RankError(f"covariance is not rank one (dominant ratio {ratio:.6f})")
    return np.sqrt(max(vals[-1], 0.0)) * fix_phase(vecs[:, -1])


@dataclass
class StructureReport:
    values: dict
    failures: list

    @property
    def ok(self):
        return not self.failures


def _cs_residual(a, w):
    nw = np.linalg.norm(w)
    return float(np.linalg.norm(a @ w) / nw) if nw > 0 else 0.0


def verify_structure(sol, s, receiver_type=None, trace_tol=1e-6, ratio_tol=1e-4, cs_tol=1e-6):
    """Check the rank and energy-covariance structure of a solved relaxation.

    Complementary-slackness residuals are ``||A W||_F / ||W||_F``, in the
    units of ``G`` (W per unit covariance).
    """
    rtype = ReceiverType.parse(receiver_type or sol.receiver_type)
    prof = energy_matrix(s)
    kkt = kkt_matrices(s, sol.lambdas, sol.beta)
    values, failures = {}, []
    tr_e = float(np.real(np.trace(sol.W_E)))
    values["trace_WE"] = tr_e
    if rtype is ReceiverType.TYPE_I:
        if tr_e > trace_tol * s.power:
            failures.append(f"trace(W_E) = {tr_e:.3e} exceeds {trace_tol:.0e}*P")
    elif tr_e > 1e-8 * s.power:
        along = float(np.real(prof.v_E.conj() @ sol.W_E @ prof.v_E))
        values["WE_alignment"] = along / tr_e
        if along < (1.0 - ratio_tol) * tr_e:
            failures.append(f"W_E not aligned with v_E (ratio {along / tr_e:.6f})")
    for i, w in enumerate(sol.W):
        r = dominant_ratio(w)
        values[f"ratio_W{i}"] = r
        if r < 1.0 - ratio_tol:
            failures.append(f"W_{i} dominant ratio {r:.6f} below {1 - ratio_tol}")
        res = _cs_residual(kkt.A[i], w)
        values[f"cs_W{i}"] = res
        if res > cs_tol:
            failures.append(f"complementary slackness residual for W_{i} is {res:.3e}")
    c = kkt.C1 if rtype is ReceiverType.TYPE_I else kkt.C2
    res = _cs_residual(c, sol.W_E)
    values["cs_WE"] = res
    if tr_e > 1e-8 * s.power and res > cs_tol:
        failures.append(f"complementary slackness residual for W_E is {res:.3e}")
    return StructureReport(values, failures)


def dual_feasibility_check(lambdas, beta, s, tol=1e-9):
    """True iff ``Z_i >= (lambda_i/gamma_i) h_i^H h_i`` for every receiver.

    Each test goes through ``psd_dominance_check`` on ``Z_i`` and
    ``b = sqrt(lambda_i/gamma_i) h_i^H``; a non-PSD ``Z_i`` fails outright.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0):
        raise PreconditionError("uplink powers must be non-negative")
    G = energy_matrix(s).G
    grams = np.einsum("ki,kj->kij", s.h.conj(), s.h)
    total = np.tensordot(lam, grams, axes=1)
    for i in range(s.K_I):
        z = total - lam[i] * grams[i] + beta * np.eye(s.M) - G
        b = np.sqrt(lam[i] / s.gamma[i]) * s.h[i].conj()
        try:
            if not psd_dominance_check(z, b, tol):
                return False
        except PreconditionError:
            return False
    return True


def dual_lmi_margin(beta, s, cap_factor=1e6, tol=1e-10):
    """Largest ``t <= 0`` with ``lam_i H_i/gamma_i - sum_{k!=i} lam_k H_k + t I <= beta I - G``.

    The uplink constraint system is feasible iff the returned margin is zero
    (up to solver accuracy); a clearly negative margin certifies infeasibility.
    The multipliers are boxed by ``sum_k lam_k ||h_k||^2 <= cap`` with
    ``cap = cap_factor * (beta + xi_E) * K_I * max(1, max gamma)`` to keep the
    problem bounded.
    """
    prof = energy_matrix(s)
    k, m = s.K_I, s.M
    grams = [outer(row) for row in s.h]
    rhs = embed_complex(beta * np.eye(m) - prof.G)
    A_s = []
    for i in range(k):
        stack = np.zeros((k + 1, 2 * m, 2 * m))
        for j in range(k):
            stack[j] = embed_complex(grams[j] / s.gamma[j] if j == i else -grams[j])
        stack[k] = np.eye(2 * m)
        A_s.append(stack)
    cap = cap_factor * (beta + prof.xi_E) * k * max(1.0, float(np.max(s.gamma)))
    A_l = np.zeros((k + 1, k + 2))
    A_l[:k, :k] = -np.eye(k)  # lam >= 0
    A_l[k, k] = 1.0  # t <= 0
    A_l[:k, k + 1] = np.sum(np.abs(s.h) ** 2, axis=1)  # cap
    c_l = np.zeros(k + 2)
    c_l[k + 1] = cap
    b = np.zeros(k + 1)
    b[k] = 1.0
    prob = StandardSdp(b, [rhs] * k, A_s, c_l, A_l)
    res = interior_point(prob, tol=tol)
    return float(res.y[k]), res
