"""Monte-Carlo sweeps over the SINR target.

Channels are i.i.d. Rayleigh with a fixed path loss per receiver class.
Every trial draws from ``numpy.random.default_rng([seed, trial])`` so results
do not depend on how trials are scheduled across worker processes.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import separate_design_type1, separate_design_type2
from .duality import DualSolver, SolverOptions, classify_region
from .errors import ApplicabilityError, ClassificationError, ConvergenceError, InfeasibleError, InputError
from .feasibility import is_feasible
from .model import Scenario, db_to_linear, dbm_to_watt

__all__ = [
    "DESIGNS",
    "JOINT_DESIGNS",
    "ALL_DESIGNS",
    "ExperimentConfig",
    "TrialRecord",
    "SweepRow",
    "SweepTable",
    "default_gamma_grid",
    "gen_scenario",
    "run_trial",
    "sweep_gamma",
    "compare_designs",
    "aggregate",
    "write_csv",
    "read_csv",
    "load_config",
    "CSV_COLUMNS",
]

JOINT_DESIGNS = ("joint_type1", "joint_type2")
ALL_DESIGNS = ("joint_type1", "joint_type2", "separate_type1", "separate_type2")
DESIGNS = ALL_DESIGNS
CSV_COLUMNS = ("gamma_db", "design", "mean_mw", "std_mw", "feasible_rate", "mean_q_w", "region_counts")
REGION_KEYS = ("R1", "R2", "R3", "NA", "infeasible", "inapplicable")


def default_gamma_grid():
    return tuple(float(x) for x in np.arange(-10.0, 30.0 + 1e-9, 2.5))


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 4
    K_I: int = 2
    K_E: int = 2
    gamma_db: tuple = field(default_factory=default_gamma_grid)
    trials: int = 200
    seed: int = 0
    eh_loss_db: float = 30.0
    id_loss_db: float = 70.0
    power_w: float = 1.0
    zeta: float = 0.5
    sigma2_dbm: float = -50.0
    alpha: object = "uniform"  # "uniform" or one weight per EH receiver
    designs: tuple = JOINT_DESIGNS

    def __post_init__(self):
        object.__setattr__(self, "gamma_db", tuple(float(g) for g in self.gamma_db))
        object.__setattr__(self, "designs", tuple(self.designs))
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if not self.gamma_db:
            raise InputError("gamma grid must not be empty")
        if self.M < 1 or self.K_I < 0 or self.K_E < 0 or self.K_I + self.K_E == 0:
            raise InputError("invalid antenna or receiver counts")
        unknown = set(self.designs) - set(ALL_DESIGNS)
        if unknown or not self.designs:
            raise InputError(f"unknown designs {sorted(unknown)}; choose from {ALL_DESIGNS}")
        if isinstance(self.alpha, str):
            if self.alpha != "uniform":
                raise InputError("alpha must be 'uniform' or a list of weights")
        else:
            object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
            if len(self.alpha) != self.K_E:
                raise InputError("alpha needs one weight per EH receiver")

    def alpha_vector(self):
        if isinstance(self.alpha, str):
            return np.full(self.K_E, 1.0 / max(self.K_E, 1))
        return np.array(self.alpha)


def load_config(path, **overrides):
    """Read an ``ExperimentConfig`` from a JSON object with the same keys."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise InputError(f"unknown config keys {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**doc)


def _rayleigh(rng, rows, cols, loss_db):
    scale = math.sqrt(10.0 ** (-loss_db / 10.0) / 2.0)
    return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))


def gen_scenario(cfg, trial, gamma_db=None):
    """Deterministic channel draw for ``(cfg.seed, trial)``."""
    rng = np.random.default_rng([cfg.seed, trial])
    g = _rayleigh(rng, cfg.K_E, cfg.M, cfg.eh_loss_db)
    h = _rayleigh(rng, cfg.K_I, cfg.M, cfg.id_loss_db)
    gdb = cfg.gamma_db[0] if gamma_db is None else gamma_db
    return Scenario(h=h, g=g, sigma2=float(dbm_to_watt(cfg.sigma2_dbm)), gamma=float(db_to_linear(gdb)),
                    alpha=cfg.alpha_vector(), zeta=cfg.zeta, power=cfg.power_w)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    gamma_db: float
    design: str
    status: str  # R1 | R2 | R3 | NA | infeasible | inapplicable
    objective_w: float  # nan unless feasible
    q_w: float  # power on dedicated energy beams

    @property
    def feasible(self):
        return self.status not in ("infeasible", "inapplicable")


def _joint(s, opts):
    solver = DualSolver(s, opts)
    r1 = solver.solve_p1()
    r2 = solver.solve_p2()
    try:
        region = classify_region(s, r1, r2).value
    except ClassificationError:
        region = "NA"
    return r1, r2, region


def run_trial(cfg, trial, opts=None):
    """All designs at every grid point for one channel draw."""
    opts = opts or SolverOptions()
    base = gen_scenario(cfg, trial)
    records = []
    dead = False  # targets only tighten along the grid, so infeasibility persists
    for gdb in sorted(cfg.gamma_db):
        s = base.with_gamma(float(db_to_linear(gdb)))
        if not dead and s.K_I and not is_feasible(s):
            dead = True
        joint = None
        for design in cfg.designs:
            if design == "separate_type1" and s.K_I > s.M - 1:
                records.append(TrialRecord(trial, gdb, design, "inapplicable", math.nan, math.nan))
                continue
            if dead:
                records.append(TrialRecord(trial, gdb, design, "infeasible", math.nan, math.nan))
                continue
            try:
                if design in JOINT_DESIGNS:
                    if joint is None:
                        joint = _joint(s, opts)
                    r1, r2, region = joint
                    rep = r1 if design == "joint_type1" else r2
                    records.append(TrialRecord(trial, gdb, design, region, rep.objective, rep.energy_beam_power))
                else:
                    fn = separate_design_type1 if design == "separate_type1" else separate_design_type2
                    res = fn(s)
                    records.append(TrialRecord(trial, gdb, design, "NA", res.objective, res.residual_power))
            except (InfeasibleError, ConvergenceError):
                records.append(TrialRecord(trial, gdb, design, "infeasible", math.nan, math.nan))
            except ApplicabilityError:
                records.append(TrialRecord(trial, gdb, design, "inapplicable", math.nan, math.nan))
    return records


def _trial_job(args):
    cfg, trial = args
    return run_trial(cfg, trial)


def _workers(limit=None):
    env = os.environ.get("SWIPT_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise InputError("SWIPT_THREADS must be an integer") from None
    if limit is not None:
        n = min(n, limit)
    return max(1, n)


def _run_all(cfg, workers=None):
    workers = workers or _workers(cfg.trials)
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if workers == 1:
        chunks = [_trial_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [rec for chunk in chunks for rec in chunk]


@dataclass(frozen=True)
class SweepRow:
    gamma_db: float
    design: str
    mean_mw: float
    std_mw: float
    feasible_rate: float
    mean_q_w: float
    region_counts: dict

    @property
    def flagged(self):
        return not math.isfinite(self.mean_mw)


@dataclass
class SweepTable:
    rows: list
    records: list = field(default_factory=list)
    config: ExperimentConfig = None

    def row(self, gamma_db, design):
        for r in self.rows:
            if r.design == design and abs(r.gamma_db - gamma_db) < 1e-9:
                return r
        raise KeyError((gamma_db, design))

    def series(self, design):
        rows = sorted((r for r in self.rows if r.design == design), key=lambda r: r.gamma_db)
        return np.array([r.gamma_db for r in rows]), np.array([r.mean_mw for r in rows])


def _fmean(values):
    return math.fsum(values) / len(values)


def aggregate(records, gamma_grid, designs):
    """Average feasible trials per (gamma, design); order of ``records`` is irrelevant."""
    rows = []
    for gdb in gamma_grid:
        for design in designs:
            recs = sorted((r for r in records if r.design == design and abs(r.gamma_db - gdb) < 1e-9),
                          key=lambda r: r.trial)
            counts = {k: 0 for k in REGION_KEYS}
            for r in recs:
                counts[r.status] = counts.get(r.status, 0) + 1
            ok = [r for r in recs if r.feasible]
            if ok:
                vals = [1e3 * r.objective_w for r in ok]
                mean = _fmean(vals)
                std = math.sqrt(_fmean([(v - mean) ** 2 for v in vals]))
                q = _fmean([r.q_w for r in ok])
            else:
                mean = std = q = math.nan
            rate = len(ok) / len(recs) if recs else 0.0
            rows.append(SweepRow(float(gdb), design, mean, std, rate, q, counts))
    return rows


def sweep_gamma(cfg, workers=None):
    """Average harvested power of each requested design along the SINR grid."""
    records = _run_all(cfg, workers)
    return SweepTable(aggregate(records, cfg.gamma_db, cfg.designs), records, cfg)


def compare_designs(cfg, workers=None):
    """Joint versus separate designs for both receiver types."""
    return sweep_gamma(replace(cfg, designs=ALL_DESIGNS), workers)


def _fmt(x):
    return repr(float(x))


def _fmt_counts(counts):
    return ";".join(f"{k}:{counts.get(k, 0)}" for k in REGION_KEYS)


def _parse_counts(text):
    out = {}
    for part in text.split(";"):
        if part:
            k, v = part.split(":")
            out[k] = int(v)
    return out


def _companion(path, suffix):
    p = Path(path)
    return p.with_name(f"{p.stem}_{suffix}{p.suffix or '.csv'}")


def write_csv(table, path, companions=True):
    """Write the summary table; also ``<stem>_series.csv`` and ``<stem>_trials.csv``."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in table.rows:
            w.writerow([_fmt(r.gamma_db), r.design, _fmt(r.mean_mw), _fmt(r.std_mw), _fmt(r.feasible_rate),
                        _fmt(r.mean_q_w), _fmt_counts(r.region_counts)])
    if not companions:
        return
    designs = list(dict.fromkeys(r.design for r in table.rows))
    grid = sorted({r.gamma_db for r in table.rows})
    with open(_companion(path, "series"), "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma_db"] + designs)
        for g in grid:
            w.writerow([_fmt(g)] + [_fmt(table.row(g, d).mean_mw) for d in designs])
    with open(_companion(path, "trials"), "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "gamma_db", "design", "status", "objective_w", "q_w"])
        for r in sorted(table.records, key=lambda r: (r.gamma_db, r.design, r.trial)):
            w.writerow([r.trial, _fmt(r.gamma_db), r.design, r.status, _fmt(r.objective_w), _fmt(r.q_w)])


def read_csv(path):
    """Read a summary table written by ``write_csv``."""
    rows = []
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise InputError(f"unexpected header {header}")
        for rec in reader:
            rows.append(SweepRow(float(rec[0]), rec[1], float(rec[2]), float(rec[3]), float(rec[4]), float(rec[5]),
                                 _parse_counts(rec[6])))
    return SweepTable(rows)


def config_to_dict(cfg):
    d = asdict(cfg)
    d["gamma_db"] = list(cfg.gamma_db)
    d["designs"] = list(cfg.designs)
    if not isinstance(cfg.alpha, str):
        d["alpha"] = list(cfg.alpha)
    return d
