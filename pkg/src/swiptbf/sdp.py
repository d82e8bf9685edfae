"""Small dense semidefinite programming solver.

``StandardSdp`` is the block-diagonal pair

    primal:  min <C, X>   s.t. <A_m, X> = b_m,  X psd
    dual:    max b^T y    s.t. sum_m y_m A_m + Z = C,  Z psd

where ``X`` has dense symmetric blocks plus one diagonal (LP) block.  It is
solved by an infeasible-start primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector.  ``RealSdp`` is a
friendlier maximization front end with inequality senses.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import InputError, SdpError

__all__ = [
    "MAX_DIMENSION",
    "MAX_CONSTRAINTS",
    "StandardSdp",
    "SdpResult",
    "interior_point",
    "RealSdp",
    "RealSdpSolution",
    "solve_real_sdp",
    "embed_complex",
    "unembed_complex",
    "write_sdpa",
    "read_sdpa",
]

MAX_DIMENSION = 64
MAX_CONSTRAINTS = 16


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def embed_complex(h):
    """Real symmetric embedding ``[[Re, -Im], [Im, Re]]`` of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError(f"expected a square matrix, got shape {h.shape}")
    if not np.allclose(h, h.conj().T, rtol=1e-10, atol=1e-12 * max(1.0, np.max(np.abs(h), initial=0.0))):
        raise InputError("matrix is not Hermitian")
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unembed_complex(x):
    """Hermitian matrix whose embedding is the rotation-symmetrized ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    x11, x12, x21, x22 = x[:n, :n], x[:n, n:], x[n:, :n], x[n:, n:]
    w = 0.5 * (x11 + x22) + 0.5j * (x21 - x12)
    return 0.5 * (w + w.conj().T)


# ---------------------------------------------------------------------------
# standard form


@dataclass
class StandardSdp:
    """Block data: ``C_s[k]`` (n,n), ``A_s[k]`` (m,n,n), ``c_l`` (n_l,), ``A_l`` (m,n_l)."""

    b: np.ndarray
    C_s: list
    A_s: list
    c_l: np.ndarray = None
    A_l: np.ndarray = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        m = self.b.size
        self.C_s = [_sym(np.asarray(c, dtype=float)) for c in self.C_s]
        self.A_s = [_sym(np.asarray(a, dtype=float).reshape(m, *np.shape(c))) for a, c in zip(self.A_s, self.C_s)]
        if self.c_l is None:
            self.c_l = np.zeros(0)
        self.c_l = np.asarray(self.c_l, dtype=float).reshape(-1)
        if self.A_l is None:
            self.A_l = np.zeros((m, self.c_l.size))
        self.A_l = np.asarray(self.A_l, dtype=float).reshape(m, self.c_l.size)
        if len(self.A_s) != len(self.C_s):
            raise InputError("one constraint stack per dense block is required")
        for c in self.C_s:
            if c.ndim != 2 or c.shape[0] != c.shape[1]:
                raise InputError("dense blocks must be square")
        for arr in [self.b, self.c_l, self.A_l, *self.C_s, *self.A_s]:
            if not np.all(np.isfinite(arr)):
                raise InputError("SDP data has non-finite entries")

    @property
    def m(self):
        return self.b.size

    @property
    def dimension(self):
        return sum(c.shape[0] for c in self.C_s) + self.c_l.size

    def apply(self, X, x):
        out = self.A_l @ x
        for a, xb in zip(self.A_s, X):
            out = out + np.einsum("mij,ij->m", a, xb)
        return out

    def adjoint(self, y):
        return [np.einsum("m,mij->ij", y, a) for a in self.A_s], self.A_l.T @ y

    def objective(self, X, x):
        return float(sum(np.vdot(c, xb) for c, xb in zip(self.C_s, X)) + self.c_l @ x)

    def scaled(self):
        """Row-normalized copy with unit-size objective and right-hand side."""
        rows = np.sqrt(sum(np.sum(a ** 2, axis=(1, 2)) for a in self.A_s) + np.sum(self.A_l ** 2, axis=1))
        rows = np.where(rows > 0, rows, 1.0)
        b = self.b / rows
        b_scale = float(np.max(np.abs(b))) if np.any(b) else 1.0
        c_norm = np.sqrt(sum(np.sum(c ** 2) for c in self.C_s) + np.sum(self.c_l ** 2))
        c_scale = float(c_norm) if c_norm > 0 else 1.0
        prob = StandardSdp(
            b / b_scale,
            [c / c_scale for c in self.C_s],
            [a / rows[:, None, None] for a in self.A_s],
            self.c_l / c_scale,
            self.A_l / rows[:, None],
        )
        return prob, rows, b_scale, c_scale


@dataclass
class SdpResult:
    status: str  # optimal | inaccurate | primal_infeasible | dual_infeasible
    X: list
    x: np.ndarray
    y: np.ndarray
    Z: list
    z: np.ndarray
    primal_objective: float
    dual_objective: float
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float
    history: list = field(default_factory=list)


class _NtScaling:
    """Per-block NT scaling ``W = G G^T`` with ``G^{-1} X G^{-T} = G^T Z G = diag(d)``."""

    def __init__(self, X, Z):
        lx = np.linalg.cholesky(X)
        lz = np.linalg.cholesky(Z)
        u, s, vt = np.linalg.svd(lz.T @ lx)
        root = np.sqrt(s)
        self.lx, self.lz = lx, lz
        self.G = (lx @ vt.T) / root
        # G^{-1} = diag(sqrt(s)) V^T Lx^{-1}
        self.Ginv = root[:, None] * solve_triangular(lx, vt.T, lower=True, trans="T").T
        self.d = s
        self.W = self.G @ self.G.T

    def scaled_x(self, dx):
        return self.Ginv @ dx @ self.Ginv.T

    def scaled_z(self, dz):
        return self.G.T @ dz @ self.G

    def lyapunov(self, target, corr):
        """``G R G^T`` where ``(D R + R D) = target*I - 2 D^2 - corr`` in the scaled space."""
        d = self.d
        rhs = -corr.copy()
        rhs[np.diag_indices_from(rhs)] += target - 2.0 * d * d
        rs = rhs / (d[:, None] + d[None, :])
        return self.G @ rs @ self.G.T


def _max_step(l, dx):
    """Largest ``a`` with ``L L^T + a*dx`` psd (``inf`` if unbounded)."""
    t = solve_triangular(l, solve_triangular(l, dx, lower=True).T, lower=True)
    lo = np.linalg.eigvalsh(_sym(t))[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _lp_step(v, dv):
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def interior_point(prob, tol=1e-10, max_iters=100, infeas_tol=1e-8):
    """Solve a ``StandardSdp``; returns an ``SdpResult`` in the original scaling."""
    if prob.dimension > MAX_DIMENSION or prob.m > MAX_CONSTRAINTS:
        raise InputError(f"SDP too large for the dense solver (dimension {prob.dimension}, {prob.m} constraints)")
    sp, rows, b_scale, c_scale = prob.scaled()
    m = sp.m
    sizes = [c.shape[0] for c in sp.C_s]
    n_l = sp.c_l.size
    n_tot = sum(sizes) + n_l
    xi = max(10.0, np.sqrt(max(sizes + [n_l, 1])), max(sizes + [n_l, 1]))
    eta = 10.0
    X = [xi * np.eye(n) for n in sizes]
    Z = [eta * np.eye(n) for n in sizes]
    x = xi * np.ones(n_l)
    z = eta * np.ones(n_l)
    y = np.zeros(m)
    b_norm = np.linalg.norm(sp.b)
    c_norm = np.sqrt(sum(np.sum(c ** 2) for c in sp.C_s) + np.sum(sp.c_l ** 2))
    status = "max_iters"
    best = None
    history = []

    for it in range(max_iters + 1):
        rp = sp.b - sp.apply(X, x)
        aty_s, aty_l = sp.adjoint(y)
        rd_s = [c - a - zz for c, a, zz in zip(sp.C_s, aty_s, Z)]
        rd_l = sp.c_l - aty_l - z
        pobj = sp.objective(X, x)
        dobj = float(sp.b @ y)
        mu = (sum(np.vdot(a, b) for a, b in zip(X, Z)) + x @ z) / n_tot
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1.0 + b_norm)
        dinf = np.sqrt(sum(np.sum(r ** 2) for r in rd_s) + np.sum(rd_l ** 2)) / (1.0 + c_norm)
        err = max(gap, pinf, dinf)
        history.append((pobj, dobj, gap, pinf, dinf))
        if best is None or err < best[0]:
            best = (err, [a.copy() for a in X], x.copy(), y.copy(), [a.copy() for a in Z], z.copy(), it)
        if err <= tol:
            status = "optimal"
            break
        # infeasibility certificates
        if dobj > 0:
            ray = np.sqrt(sum(np.sum((a + zz) ** 2) for a, zz in zip(aty_s, Z)) + np.sum((aty_l + z) ** 2))
            if ray / dobj < infeas_tol:
                status = "primal_infeasible"
                break
        if pobj < 0:
            if np.linalg.norm(sp.apply(X, x)) / -pobj < infeas_tol:
                status = "dual_infeasible"
                break
        if it == max_iters:
            break
        try:
            scal = [_NtScaling(a, zz) for a, zz in zip(X, Z)]
            w_l = x / z
            M = (sp.A_l * w_l) @ sp.A_l.T
            for a, sc in zip(sp.A_s, scal):
                wa = sc.W @ a @ sc.W
                M = M + np.einsum("iab,jab->ij", a, wa)
            M = _sym(M)
            fac = cho_factor(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m))
        except np.linalg.LinAlgError:
            status = "numerical"
            break

        wrw_s = [sc.W @ r @ sc.W for sc, r in zip(scal, rd_s)]
        wrw_l = w_l * rd_l

        def direction(sigma_mu, corr_s, corr_l):
            # symmetrized XZ + ZX = 2*sigma*mu*I on dense blocks, x*z = sigma*mu on the LP block
            rc_s = [sc.lyapunov(2.0 * sigma_mu, cs) for sc, cs in zip(scal, corr_s)]
            rc_l = (sigma_mu - x * z - corr_l) / z
            rhs = rp - sp.apply(rc_s, rc_l) + sp.apply(wrw_s, wrw_l)
            dy = cho_solve(fac, rhs)
            at_s, at_l = sp.adjoint(dy)
            dz_s = [r - a for r, a in zip(rd_s, at_s)]
            dz_l = rd_l - at_l
            dx_s = [_sym(rc - sc.W @ dzz @ sc.W) for rc, sc, dzz in zip(rc_s, scal, dz_s)]
            dx_l = rc_l - w_l * dz_l
            return dx_s, dx_l, dy, dz_s, dz_l

        def steps(dx_s, dx_l, dz_s, dz_l):
            ap = min([_max_step(sc.lx, d) for sc, d in zip(scal, dx_s)] + [_lp_step(x, dx_l)], default=np.inf)
            ad = min([_max_step(sc.lz, d) for sc, d in zip(scal, dz_s)] + [_lp_step(z, dz_l)], default=np.inf)
            return ap, ad

        zero_s = [np.zeros((n, n)) for n in sizes]
        dx_s, dx_l, dy, dz_s, dz_l = direction(0.0, zero_s, np.zeros(n_l))
        ap, ad = steps(dx_s, dx_l, dz_s, dz_l)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (sum(np.vdot(a + ap * da, b + ad * db) for a, da, b, db in zip(X, dx_s, Z, dz_s))
                  + (x + ap * dx_l) @ (z + ad * dz_l)) / n_tot
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        corr_s = []
        for sc, dxa, dza in zip(scal, dx_s, dz_s):
            sx, sz = sc.scaled_x(dxa), sc.scaled_z(dza)
            corr_s.append(sx @ sz + sz @ sx)
        dx_s, dx_l, dy, dz_s, dz_l = direction(sigma * mu, corr_s, dx_l * dz_l)
        ap, ad = steps(dx_s, dx_l, dz_s, dz_l)
        tau = 0.9 + 0.09 * min(1.0, ap, ad)
        ap, ad = min(1.0, tau * ap), min(1.0, tau * ad)
        X = [_sym(a + ap * d) for a, d in zip(X, dx_s)]
        x = x + ap * dx_l
        y = y + ad * dy
        Z = [_sym(a + ad * d) for a, d in zip(Z, dz_s)]
        z = z + ad * dz_l
        if max(ap, ad) < 1e-10:
            status = "stalled"
            break

    if status not in ("optimal", "primal_infeasible", "dual_infeasible"):
        err, X, x, y, Z, z, it = best
        status = "inaccurate" if err <= max(1e-6, np.sqrt(tol)) else status
    # undo the scaling
    X = [b_scale * a for a in X]
    x = b_scale * x
    Z = [c_scale * a for a in Z]
    z = c_scale * z
    y = c_scale * y / rows
    hist = history
    pobj = prob.objective(X, x)
    dobj = float(prob.b @ y)
    last = history[min(it, len(history) - 1)]
    return SdpResult(status, X, x, y, Z, z, pobj, dobj, it, last[2], last[3], last[4], hist)


# ---------------------------------------------------------------------------
# maximization front end with senses

_SENSES = ("<=", ">=", "==")


@dataclass
class _Row:
    terms: dict  # block index -> symmetric matrix
    sense: str
    rhs: float
    name: str


class RealSdp:
    """``max sum_k <C_k, X_k>`` over psd blocks ``X_k`` with affine trace constraints."""

    def __init__(self):
        self.sizes = []
        self.names = []
        self.C = []
        self.rows = []
        self.label = None  # free-form tag for whoever built the problem

    def add_block(self, n, name=None):
        if n < 1:
            raise InputError("block size must be positive")
        self.sizes.append(int(n))
        self.names.append(name or f"X{len(self.sizes) - 1}")
        self.C.append(np.zeros((n, n)))
        return len(self.sizes) - 1

    def set_objective(self, block, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.sizes[block],) * 2:
            raise InputError(f"objective block {block} has shape {c.shape}")
        self.C[block] = _sym(c)

    def add_constraint(self, terms, sense, rhs, name=None):
        if sense not in _SENSES:
            raise InputError(f"sense must be one of {_SENSES}")
        clean = {}
        for k, a in terms.items():
            a = np.asarray(a, dtype=float)
            if a.shape != (self.sizes[k],) * 2:
                raise InputError(f"constraint term for block {k} has shape {a.shape}")
            clean[k] = _sym(a)
        self.rows.append(_Row(clean, sense, float(rhs), name or f"c{len(self.rows)}"))
        return len(self.rows) - 1

    @property
    def num_constraints(self):
        return len(self.rows)

    def evaluate(self, X):
        """Left-hand sides of every constraint at block values ``X``."""
        return np.array([sum(np.vdot(a, X[k]) for k, a in r.terms.items()) for r in self.rows])

    def objective_at(self, X):
        return float(sum(np.vdot(c, x) for c, x in zip(self.C, X)))

    def to_standard(self):
        """Equality form ``min <-C, X>``; inequality rows get slacks in the LP block.

        A slack's coefficient is the Frobenius norm of the rest of its row so
        slacks live on the same scale as the matrix variables.
        """
        m = len(self.rows)
        A_s = [np.zeros((m, n, n)) for n in self.sizes]
        slack_rows = [i for i, r in enumerate(self.rows) if r.sense != "=="]
        A_l = np.zeros((m, len(slack_rows)))
        b = np.zeros(m)
        slack_coef = np.zeros(m)
        for i, r in enumerate(self.rows):
            for k, a in r.terms.items():
                A_s[k][i] = a
            b[i] = r.rhs
        for j, i in enumerate(slack_rows):
            nrm = np.sqrt(sum(np.sum(a ** 2) for a in self.rows[i].terms.values())) or 1.0
            slack_coef[i] = nrm if self.rows[i].sense == "<=" else -nrm
            A_l[i, j] = slack_coef[i]
        std = StandardSdp(b, [-c for c in self.C], A_s, np.zeros(len(slack_rows)), A_l)
        return std, slack_coef


@dataclass
class RealSdpSolution:
    status: str
    X: list
    value: float  # primal objective (maximization)
    dual_value: float
    multipliers: np.ndarray  # >= 0 for inequalities, sign-free for equalities
    Z: list  # dual slack per block: -C + sum_m mult_m * (+-A_m)
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float


def solve_real_sdp(p, tol=1e-10, max_iters=100):
    """Solve a ``RealSdp``; raises ``SdpError`` unless a solution is found."""
    std, _ = p.to_standard()
    res = interior_point(std, tol=tol, max_iters=max_iters)
    if res.status in ("primal_infeasible", "dual_infeasible"):
        raise SdpError(f"SDP is {res.status.replace('_', ' ')}", status=res.status)
    if res.status not in ("optimal", "inaccurate"):
        raise SdpError(f"interior point failed ({res.status})", status=res.status)
    senses = np.array([r.sense for r in p.rows])
    mult = np.where(senses == ">=", res.y, -res.y)
    return RealSdpSolution(
        status=res.status,
        X=res.X,
        value=-res.primal_objective,
        dual_value=-res.dual_objective,
        multipliers=mult,
        Z=res.Z,
        iterations=res.iterations,
        gap=res.gap,
        primal_residual=res.primal_residual,
        dual_residual=res.dual_residual,
    )


# ---------------------------------------------------------------------------
# SDPA sparse text format


def write_sdpa(prob, path):
    """Write a ``StandardSdp`` in SDPA sparse format.

    SDPA's dual form ``max <F0, Y> s.t. <F_m, Y> = c_m`` is our primal with
    ``F0 = -C``, ``F_m = A_m`` and ``c = b``.  The LP block is written as a
    diagonal block (negative size).  Each record is ``matno blkno i j value``
    over the upper triangle, 1-based.
    """
    sizes = [c.shape[0] for c in prob.C_s]
    struct = sizes + ([-prob.c_l.size] if prob.c_l.size else [])
    lines = [
        "* SDPA sparse format written by swiptbf",
        str(prob.m),
        str(len(struct)),
        " ".join(str(s) for s in struct),
        " ".join(repr(float(v)) for v in prob.b),
    ]

    def records(matno, dense_blocks, diag):
        for k, a in enumerate(dense_blocks, start=1):
            iu, ju = np.triu_indices(a.shape[0])
            for i, j in zip(iu, ju):
                if a[i, j] != 0.0:
                    lines.append(f"{matno} {k} {i + 1} {j + 1} {float(a[i, j])!r}")
        if diag is not None:
            for i, v in enumerate(diag):
                if v != 0.0:
                    lines.append(f"{matno} {len(dense_blocks) + 1} {i + 1} {i + 1} {float(v)!r}")

    has_lp = prob.c_l.size > 0
    records(0, [-c for c in prob.C_s], -prob.c_l if has_lp else None)
    for mi in range(prob.m):
        records(mi + 1, [a[mi] for a in prob.A_s], prob.A_l[mi] if has_lp else None)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sdpa(path):
    """Inverse of ``write_sdpa``."""
    with open(path, encoding="ascii") as fh:
        raw = [ln.strip() for ln in fh if ln.strip() and ln.lstrip()[0] not in "*\""]
    clean = lambda s: s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ")
    m = int(clean(raw[0]).split()[0])
    nblocks = int(clean(raw[1]).split()[0])
    struct = [int(v) for v in clean(raw[2]).split()[:nblocks]]
    b = np.array([float(v) for v in clean(raw[3]).split()[:m]])
    dense = [s for s in struct if s > 0]
    n_l = sum(-s for s in struct if s < 0)
    C_s = [np.zeros((n, n)) for n in dense]
    A_s = [np.zeros((m, n, n)) for n in dense]
    c_l = np.zeros(n_l)
    A_l = np.zeros((m, n_l))
    dense_index = {}
    for k, s in enumerate(struct, start=1):
        if s > 0:
            dense_index[k] = len(dense_index)
    for ln in raw[4:]:
        mat, blk, i, j, v = clean(ln).split()[:5]
        mat, blk, i, j, v = int(mat), int(blk), int(i) - 1, int(j) - 1, float(v)
        if blk in dense_index:
            k = dense_index[blk]
            target = C_s[k] if mat == 0 else A_s[k][mat - 1]
            sign = -1.0 if mat == 0 else 1.0
            target[i, j] = sign * v
            target[j, i] = sign * v
        else:
            if mat == 0:
                c_l[i] = -v
            else:
                A_l[mat - 1, i] = v
    return StandardSdp(b, C_s, A_s, c_l, A_l)
