import numpy as np
import pytest
from corpus import corpus
from hypothesis import given
from hypothesis import strategies as st

from swiptbf.errors import InfeasibleError, PreconditionError
from swiptbf.experiments import ExperimentConfig, gen_scenario
from swiptbf.feasibility import (
    feasibility_report,
    is_feasible,
    min_power_beams,
    oebf_feasibility,
)
from swiptbf.model import BeamSolution, ReceiverType, Scenario, energy_matrix, sinrs
from swiptbf.sdr import build_min_power_sdr, solve_sdr
from swiptbf.uplink import UplinkProblem, iterate_fixed_point

# P_min of the fixtures computed with cvxpy/CLARABEL (tests/oracles/freeze_sdr_values.py)
FROZEN_PMIN = {
    "random_k2.json": 0.3393206360821253,
    "k1.json": 0.4875284953906488,
    "region2.json": 0.12216788557264743,
}


def test_scalar_closed_form():
    s = Scenario(h=[[0.3 + 0.4j]], g=[[1.0]], sigma2=0.2, gamma=3.0, alpha=1.0)
    _, p_min = min_power_beams(s)
    assert p_min == pytest.approx(3.0 * 0.2 / 0.25, rel=1e-12)


def test_orthogonal_channels_decouple():
    h = np.array([[2.0, 0, 0], [0, 1j, 0]])
    s = Scenario(h=h, g=np.ones((1, 3)), sigma2=[0.5, 0.1], gamma=[2.0, 4.0], alpha=1.0)
    _, p_min = min_power_beams(s)
    assert p_min == pytest.approx(2.0 * 0.5 / 4.0 + 4.0 * 0.1 / 1.0, rel=1e-12)


@pytest.mark.parametrize("name", sorted(FROZEN_PMIN))
def test_pmin_matches_frozen_oracle(load_fixture, name):
    _, p_min = min_power_beams(load_fixture(name))
    assert p_min == pytest.approx(FROZEN_PMIN[name], rel=1e-6)


def test_min_power_beams_tight():
    for s in corpus(5):
        beams, _ = min_power_beams(s)
        achieved = sinrs(BeamSolution(beams, None, ReceiverType.TYPE_I), s)
        np.testing.assert_allclose(achieved, s.gamma, rtol=1e-8)


def test_min_power_requires_id_receiver():
    s = Scenario(h=np.zeros((0, 2)), g=np.ones((1, 2)), sigma2=[], gamma=[], alpha=1.0)
    with pytest.raises(PreconditionError):
        min_power_beams(s)


def test_interference_limited_is_infeasible():
    # two users on the same channel cannot both reach SINR 1 at any power
    h = np.array([[1.0, 0.0], [1.0, 0.0]])
    s = Scenario(h=h, g=np.ones((1, 2)), sigma2=1e-3, gamma=1.5, alpha=1.0)
    with pytest.raises(InfeasibleError):
        min_power_beams(s)
    assert not is_feasible(s)


def test_is_feasible_against_budget(load_fixture):
    s = load_fixture("random_k2.json")
    _, p_min = min_power_beams(s)
    assert is_feasible(s.with_power(2 * p_min))
    assert not is_feasible(s.with_power(0.5 * p_min))


@given(st.integers(0, 10**6))
def test_min_power_independent_of_start(seed):
    s = corpus(1, seed=seed % 50)[0]
    _, p_ref = min_power_beams(s)
    prob = UplinkProblem.power_minimization(s)
    lam0 = np.random.default_rng(seed).uniform(0, 1e8, s.K_I)
    run = iterate_fixed_point(prob, 1.0, lam0, fp_tol=1e-12)
    zero = iterate_fixed_point(prob, 1.0, np.zeros(s.K_I), fp_tol=1e-12)
    np.testing.assert_allclose(run.lambdas, zero.lambdas, rtol=1e-6)
    assert p_ref > 0


def test_feasibility_agrees_with_sdr_oracle():
    cfg = ExperimentConfig()
    for trial in range(50):
        s = gen_scenario(cfg, trial, [0.0, 5.0, 10.0, 15.0, 20.0][trial % 5])
        sdr = solve_sdr(build_min_power_sdr(s))
        oracle_feasible = sdr.status in ("optimal", "inaccurate") and -sdr.value <= s.power
        assert is_feasible(s) == oracle_feasible, trial


# OeBF feasibility -------------------------------------------------------------


def test_oebf_single_user_closed_form():
    s = Scenario(h=[[1.0, 1.0j]], g=[[1.0, 0.0]], sigma2=0.1, gamma=2.0, alpha=1.0, power=1.0)
    v = energy_matrix(s).v_E
    expected = 2.0 * 0.1 / abs(s.h[0] @ v) ** 2
    p = oebf_feasibility(s)
    assert p == pytest.approx([expected])
    assert oebf_feasibility(s.with_power(0.99 * expected)) is None


def test_oebf_absent_at_high_targets():
    s = gen_scenario(ExperimentConfig(), 0, 3.0)  # gamma > 1 with two users: rho(D) > 1
    assert oebf_feasibility(s) is None


def test_oebf_absent_when_orthogonal_to_ve():
    s = Scenario(h=[[0.0, 1.0]], g=[[1.0, 0.0]], sigma2=0.1, gamma=0.1, alpha=1.0)
    assert oebf_feasibility(s) is None


def test_oebf_powers_satisfy_constraints_and_are_minimal(load_fixture):
    s = load_fixture("oebf_feasible.json")
    v = energy_matrix(s).v_E
    p = oebf_feasibility(s)
    assert p is not None and np.sum(p) <= s.power
    sol = BeamSolution(np.sqrt(p)[:, None] * v[None, :], None, ReceiverType.TYPE_I)
    np.testing.assert_allclose(sinrs(sol, s), s.gamma, rtol=1e-9)
    # any other point meeting the constraints dominates p
    rng = np.random.default_rng(0)
    for _ in range(200):
        q = p * rng.uniform(0.5, 3.0, p.size)
        sol = BeamSolution(np.sqrt(q)[:, None] * v[None, :], None, ReceiverType.TYPE_I)
        if np.all(sinrs(sol, s) >= s.gamma * (1 - 1e-12)):
            assert np.all(q >= p * (1 - 1e-9))


def test_report_fields(load_fixture):
    rep = feasibility_report(load_fixture("below_pmin.json"))
    assert not rep.feasible and rep.min_power > 1.0 and rep.oebf_powers is None
    rep = feasibility_report(load_fixture("oebf_feasible.json"))
    assert rep.feasible and rep.min_power <= 1.0 and rep.oebf_powers is not None
