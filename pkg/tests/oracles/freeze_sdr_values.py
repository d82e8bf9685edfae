"""Recompute the frozen reference values used in the test suite.

Uses cvxpy with the CLARABEL solver, independent of the package's own
interior-point code. Run from the repository root:

    python3 tests/oracles/freeze_sdr_values.py
"""

import json
from pathlib import Path

import cvxpy as cp
import numpy as np

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name):
    doc = json.loads((FIXTURES / name).read_text())
    h = np.array([[complex(*z) for z in row] for row in doc["channels_h"]]).reshape(doc["K_I"], doc["M"])
    g = np.array([[complex(*z) for z in row] for row in doc["channels_g"]]).reshape(doc["K_E"], doc["M"])
    return doc, h, g


def sdr_value(name, type_two):
    doc, h, g = load(name)
    m, k = doc["M"], doc["K_I"]
    sigma2, gamma = np.array(doc["sigma2_w"]), np.array(doc["gamma_linear"])
    G = doc["zeta"] * sum(a * np.outer(gj.conj(), gj) for a, gj in zip(doc["alpha"], g))
    W = [cp.Variable((m, m), hermitian=True) for _ in range(k)]
    WE = cp.Variable((m, m), hermitian=True)
    cons = [w >> 0 for w in W] + [WE >> 0]
    for i in range(k):
        H = np.outer(h[i].conj(), h[i])
        interference = sum(cp.real(cp.trace(H @ W[j])) for j in range(k) if j != i)
        if not type_two:
            interference = interference + cp.real(cp.trace(H @ WE))
        cons.append(cp.real(cp.trace(H @ W[i])) / gamma[i] - interference >= sigma2[i])
    cons.append(sum(cp.real(cp.trace(w)) for w in W + [WE]) <= doc["power_w"])
    obj = cp.Maximize(sum(cp.real(cp.trace(G @ w)) for w in W + [WE]))
    prob = cp.Problem(obj, cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return prob.value


def min_power(name):
    doc, h, _ = load(name)
    m, k = doc["M"], doc["K_I"]
    sigma2, gamma = np.array(doc["sigma2_w"]), np.array(doc["gamma_linear"])
    W = [cp.Variable((m, m), hermitian=True) for _ in range(k)]
    cons = [w >> 0 for w in W]
    for i in range(k):
        H = np.outer(h[i].conj(), h[i])
        interference = sum(cp.real(cp.trace(H @ W[j])) for j in range(k) if j != i)
        cons.append(cp.real(cp.trace(H @ W[i])) / gamma[i] - interference >= sigma2[i])
    prob = cp.Problem(cp.Minimize(sum(cp.real(cp.trace(w)) for w in W)), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-14, tol_gap_rel=1e-12, tol_feas=1e-12)
    return prob.value


if __name__ == "__main__":
    for name in ("random_k2.json", "k1.json", "oebf_feasible.json", "region2.json"):
        print(name, "sdr1", repr(sdr_value(name, False)), "sdr2", repr(sdr_value(name, True)),
              "pmin", repr(min_power(name)))
