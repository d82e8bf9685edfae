import numpy as np
import pytest
from corpus import corpus

from swiptbf.baselines import separate_design_type1, separate_design_type2
from swiptbf.duality import solve
from swiptbf.errors import ApplicabilityError, InfeasibleError
from swiptbf.feasibility import min_power_beams
from swiptbf.model import BeamSolution, ReceiverType, energy_matrix, sinrs, validate_solution


@pytest.fixture(scope="module")
def scenarios():
    return corpus(6)


def test_type1_energy_beam_causes_no_interference(scenarios):
    for s in scenarios:
        res = separate_design_type1(s)
        e = res.solution.energy_beams[0]
        assert np.all(np.abs(s.h @ e) <= 1e-10 * np.linalg.norm(s.h) * max(np.linalg.norm(e), 1.0))


def test_residual_power_matches_feasibility(scenarios):
    for s in scenarios:
        _, p_min = min_power_beams(s)
        for fn in (separate_design_type1, separate_design_type2):
            res = fn(s)
            assert res.residual_power == pytest.approx(s.power - p_min, rel=1e-8)


def test_baselines_below_joint_designs(scenarios):
    for s in scenarios:
        r1, r2 = solve(s)
        b1, b2 = separate_design_type1(s), separate_design_type2(s)
        assert b1.objective <= r1.objective * (1 + 1e-6)
        assert b2.objective <= r2.objective * (1 + 1e-6)
        assert b2.objective >= b1.objective * (1 - 1e-12)


def test_type2_lower_bound_and_sinr_invariance(scenarios):
    for s in scenarios:
        res = separate_design_type2(s)
        prof = energy_matrix(s)
        assert res.objective >= prof.xi_E * res.residual_power * (1 - 1e-12)
        bare = BeamSolution(res.solution.info_beams, None, ReceiverType.TYPE_II)
        assert np.array_equal(sinrs(bare, s), sinrs(res.solution, s))


def test_solutions_validate(scenarios):
    for s in scenarios:
        for fn in (separate_design_type1, separate_design_type2):
            assert validate_solution(fn(s).solution, s, tol=1e-6) == []


def test_applicability_and_infeasibility(load_fixture):
    s = corpus(1, k_i=4)[0]
    with pytest.raises(ApplicabilityError):
        separate_design_type1(s)
    separate_design_type2(s)
    with pytest.raises(InfeasibleError):
        separate_design_type2(load_fixture("below_pmin.json"))
