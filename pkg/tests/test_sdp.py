import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swiptbf.errors import InputError, SdpError
from swiptbf.sdp import (
    MAX_DIMENSION,
    RealSdp,
    StandardSdp,
    embed_complex,
    interior_point,
    read_sdpa,
    solve_real_sdp,
    unembed_complex,
    write_sdpa,
)

seeds = st.integers(0, 2**32 - 1)


def rand_herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def test_embed_identity():
    np.testing.assert_array_equal(embed_complex(np.eye(2)), np.eye(4))


def test_embed_rejects_non_hermitian():
    with pytest.raises(InputError):
        embed_complex(np.array([[0, 1.0], [0, 0]]))


@given(seeds, st.integers(1, 5))
def test_embed_trace_spectrum_and_inverse(seed, n):
    h = rand_herm(np.random.default_rng(seed), n)
    e = embed_complex(h)
    assert np.trace(e) == pytest.approx(2 * np.real(np.trace(h)))
    ev = np.sort(np.linalg.eigvalsh(h))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(e)), np.sort(np.repeat(ev, 2)), atol=1e-10)
    np.testing.assert_allclose(unembed_complex(e), h, atol=1e-14)


@given(seeds, st.integers(1, 4))
def test_embedded_inner_product(seed, n):
    rng = np.random.default_rng(seed)
    a, w = rand_herm(rng, n), rand_herm(rng, n)
    assert np.vdot(0.5 * embed_complex(a), embed_complex(w)) == pytest.approx(np.real(np.trace(a @ w)))


def test_one_dimensional_sdp():
    p = RealSdp()
    x = p.add_block(1)
    p.set_objective(x, [[1.0]])
    p.add_constraint({x: [[1.0]]}, "<=", 3.0)
    sol = solve_real_sdp(p)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(3.0, rel=1e-9)
    assert sol.X[0][0, 0] == pytest.approx(3.0, rel=1e-9)
    assert sol.multipliers[0] == pytest.approx(1.0, rel=1e-8)


def random_problem(rng, n=4, m=3):
    """Random ``RealSdp`` that is strictly feasible (``X = I``) and bounded (trace cap)."""
    p = RealSdp()
    k = p.add_block(n)
    c = rng.standard_normal((n, n))
    p.set_objective(k, c + c.T)
    mats = []
    for _ in range(m):
        a = rng.standard_normal((n, n))
        a = a + a.T
        mats.append(a)
        p.add_constraint({k: a}, ">=", float(np.trace(a)) - 1.0)
    p.add_constraint({k: np.eye(n)}, "<=", 2.0 * n)
    return p, c + c.T, mats


def cvxpy_value(n, c, mats, rhs):
    X = cp.Variable((n, n), symmetric=True)
    cons = [X >> 0] + [cp.trace(a @ X) >= r for a, r in zip(mats, rhs)] + [cp.trace(X) <= 2.0 * n]
    prob = cp.Problem(cp.Maximize(cp.trace(c @ X)), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize("seed", range(8))
def test_random_sdp_matches_cvxpy(seed):
    rng = np.random.default_rng(seed)
    p, c, mats = random_problem(rng)
    sol = solve_real_sdp(p)
    ref = cvxpy_value(4, c, mats, [float(np.trace(a)) - 1.0 for a in mats])
    assert sol.value == pytest.approx(ref, rel=1e-6, abs=1e-8)
    assert abs(sol.value - sol.dual_value) <= 1e-7 * (1 + abs(sol.value))
    # certificates validated by substitution
    lhs = p.evaluate(sol.X)
    assert np.all(lhs[:-1] >= np.array([r.rhs for r in p.rows[:-1]]) - 1e-8)
    assert lhs[-1] <= p.rows[-1].rhs + 1e-8
    assert np.linalg.eigvalsh(sol.X[0])[0] >= -1e-9
    assert np.all(sol.multipliers >= -1e-9)


def test_infeasible_certificate():
    p = RealSdp()
    k = p.add_block(2)
    p.add_constraint({k: np.eye(2)}, "<=", -1.0)  # trace(X) <= -1 with X psd
    with pytest.raises(SdpError) as info:
        solve_real_sdp(p)
    assert info.value.status == "primal_infeasible"


def test_unbounded_certificate():
    p = RealSdp()
    k = p.add_block(2)
    p.set_objective(k, np.eye(2))
    p.add_constraint({k: np.diag([1.0, 0.0])}, "<=", 1.0)
    with pytest.raises(SdpError) as info:
        solve_real_sdp(p)
    assert info.value.status == "dual_infeasible"


def test_size_limits():
    n = MAX_DIMENSION + 1
    prob = StandardSdp([1.0], [np.eye(n)], [np.eye(n)[None]])
    with pytest.raises(InputError):
        interior_point(prob)


def test_sdpa_round_trip(tmp_path):
    p, _, _ = random_problem(np.random.default_rng(11))
    std, _ = p.to_standard()
    path = tmp_path / "prob.dat-s"
    write_sdpa(std, path)
    back = read_sdpa(path)
    np.testing.assert_allclose(back.b, std.b)
    np.testing.assert_allclose(back.C_s[0], std.C_s[0])
    np.testing.assert_allclose(back.A_s[0], std.A_s[0])
    np.testing.assert_allclose(back.A_l, std.A_l)
    assert interior_point(back).primal_objective == pytest.approx(interior_point(std).primal_objective, rel=1e-9)
