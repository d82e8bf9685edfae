"""Seeded scenario corpora shared by the unit and acceptance tests."""

import numpy as np

from swiptbf.experiments import ExperimentConfig, gen_scenario
from swiptbf.feasibility import feasibility_report
from swiptbf.model import Scenario

CORPUS_GAMMAS_DB = (0.0, 2.5, 5.0, 7.5, 10.0)


def corpus(count, k_i=2, seed=0, max_draws=2000):
    """``count`` feasible scenarios whose SINR targets rule out the OeBF.

    Targets cycle through ``CORPUS_GAMMAS_DB``; draws that are infeasible or
    OeBF-feasible are skipped (the relaxation's energy covariance is not
    unique when the OeBF already meets every target).
    """
    cfg = ExperimentConfig(K_I=k_i, seed=seed)
    out = []
    for trial in range(max_draws):
        gdb = CORPUS_GAMMAS_DB[trial % len(CORPUS_GAMMAS_DB)]
        s = gen_scenario(cfg, trial, gdb)
        rep = feasibility_report(s)
        if rep.feasible and rep.oebf_powers is None:
            out.append(s)
            if len(out) == count:
                return out
    raise RuntimeError(f"only {len(out)} usable scenarios in {max_draws} draws")


def oebf_corpus(count, k_i=2, seed=0):
    """Feasible scenarios at -10 dB whose targets the OeBF meets."""
    cfg = ExperimentConfig(K_I=k_i, seed=seed)
    out = []
    for trial in range(2000):
        s = gen_scenario(cfg, trial, -10.0)
        if feasibility_report(s).oebf_powers is not None:
            out.append(s)
            if len(out) == count:
                return out
    raise RuntimeError("not enough OeBF-feasible draws")


def unbounded_corpus(count, seed=0, m=4, k_i=2):
    """Instances whose ``G`` is full rank, so the inner problem at ``beta = 0`` is unbounded."""
    rng = np.random.default_rng([seed, 99])
    out = []
    for _ in range(count):
        cn = lambda r, c, scale: np.sqrt(scale / 2) * (rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c)))
        out.append(Scenario(h=cn(k_i, m, 1e-7), g=cn(m, m, 1e-3), sigma2=1e-8, gamma=1.0,
                            alpha=np.full(m, 1.0 / m), zeta=0.5, power=1.0))
    return out
