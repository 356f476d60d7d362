import numpy as np
import pytest
import scipy.optimize
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from ffopt.lp_solver import SolverConfig, solve
from ffopt.sparse_model import LinearModel, ModelBuilder


def one_var(sense="maximize", row_hi=1.0, ub=2.0, lb=0.0):
    b = ModelBuilder("one")
    b.add_variable("x", lb=lb, ub=ub)
    b.add_row("cap", {"x": 1.0}, hi=row_hi)
    b.set_objective(sense, {"x": 1.0})
    return b.build()


def gap_ok(sol, tol=1e-8):
    return abs(sol.primal_objective - sol.dual_objective) <= tol * (1 + abs(sol.primal_objective))


def test_trivial_lp():
    sol = solve(one_var())
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(1.0, abs=1e-7)
    assert sol.values["x"] == pytest.approx(1.0, abs=1e-7)
    assert gap_ok(sol)
    assert sol.duals["cap"] == pytest.approx(1.0, abs=1e-6)


def test_minimize_at_lower_bound():
    sol = solve(one_var("minimize", lb=-3.0))
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(-3.0, abs=1e-7)


def test_infeasible_rows():
    b = ModelBuilder()
    b.add_variables(["x", "y"], lb=0.0, ub=np.inf)
    b.add_row("lo", {"x": 1.0, "y": 1.0}, lo=3.0)
    b.add_row("hi", {"x": 1.0, "y": 1.0}, hi=1.0)
    b.set_objective("minimize", {"x": 1.0})
    assert solve(b.build()).status == "infeasible"


def test_trivially_infeasible_empty_row():
    b = ModelBuilder()
    b.add_variable("x", lb=0.0, ub=1.0)
    b.add_rows(["empty"], sp.csr_matrix((1, 1)), 1.0, 2.0)
    assert solve(b.build()).status == "infeasible"


def test_unbounded():
    b = ModelBuilder()
    b.add_variables(["x", "y"], lb=0.0, ub=np.inf)
    b.add_row("r", {"x": 1.0, "y": -1.0}, hi=1.0)
    b.set_objective("maximize", {"x": 1.0, "y": 1.0})
    assert solve(b.build()).status == "unbounded"


def test_iteration_limit_reported():
    b = ModelBuilder()
    b.add_variables(["x", "y"], lb=0.0, ub=4.0)
    b.add_row("r", {"x": 1.0, "y": 2.0}, hi=5.0)
    b.set_objective("maximize", {"x": 3.0, "y": 1.0})
    sol = solve(b.build(), SolverConfig(max_iterations=1))
    assert sol.status == "iteration_limit"
    assert sol.iterations == 1


def test_fixed_and_free_columns():
    # x free, y fixed at 2: min x s.t. x - y >= -1  -> x = 1
    b = ModelBuilder()
    b.add_variable("x", lb=-np.inf, ub=np.inf)
    b.add_variable("y", lb=2.0, ub=2.0)
    b.add_row("r", {"x": 1.0, "y": -1.0}, lo=-1.0)
    b.set_objective("minimize", {"x": 1.0}, constant=10.0)
    sol = solve(b.build())
    assert sol.status == "optimal"
    assert sol.values["x"] == pytest.approx(1.0, abs=1e-7)
    assert sol.values["y"] == 2.0
    assert sol.primal_objective == pytest.approx(11.0, abs=1e-7)


def test_ranged_row_and_equality():
    b = ModelBuilder()
    b.add_variables(["x", "y", "z"], lb=0.0, ub=10.0)
    b.add_row("range", {"x": 1.0, "y": 1.0}, lo=2.0, hi=3.0)
    b.add_row("eq", {"y": 1.0, "z": -1.0}, lo=0.5, hi=0.5)
    b.set_objective("maximize", {"x": 2.0, "y": 1.0, "z": 1.0})
    sol = solve(b.build())
    # x + y = 3 at the top; z = y - 0.5, objective 2x + 2y - 0.5 with y free in [0.5, 3]
    assert sol.primal_objective == pytest.approx(5.5, abs=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(step_fraction=1.0)
    with pytest.raises(ValueError):
        SolverConfig(rel_gap_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(path="gpu")
    with pytest.raises(ValueError):
        SolverConfig(centrality_correctors=-1)


def test_correctors_do_not_change_the_optimum():
    from ffopt.mask_lp import MaskProblem, build_model
    m = build_model(MaskProblem(20, 8, rho0=2.0, rho1=8.0), "twostep")
    a = solve(m, SolverConfig(centrality_correctors=0))
    b = solve(m)
    assert a.status == b.status == "optimal"
    assert b.iterations <= a.iterations
    assert abs(a.primal_objective - b.primal_objective) <= 1e-7 * abs(a.primal_objective)


def test_full_geometry_twostep_reaches_optimum():
    # tight contrast rows punish inaccurate augmented solves; reference value from HiGHS
    from ffopt.mask_lp import MaskProblem, build_model
    sol = solve(build_model(MaskProblem(30, 35), "twostep"))
    assert sol.status == "optimal"
    assert sol.primal_objective == pytest.approx(0.05144202814, rel=1e-6)


def test_dense_path_refuses_free_columns():
    b = ModelBuilder()
    b.add_variable("x", lb=-np.inf, ub=np.inf)
    b.add_row("r", {"x": 1.0}, hi=1.0)
    b.set_objective("maximize", {"x": 1.0})
    with pytest.raises(ValueError):
        solve(b.build(), SolverConfig(path="dense"))


def test_deterministic_trace():
    m = random_lp(7, 5, 3)
    a, b = solve(m), solve(m)
    assert a.trace == b.trace
    assert np.array_equal(a.x, b.x)


def random_lp(seed, n, k):
    """Feasible, bounded LP: rows built around a known interior point."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(k, n))
    A[rng.random((k, n)) < 0.3] = 0.0
    x0 = rng.random(n)
    act = A @ x0
    lo = np.where(rng.random(k) < 0.5, act - rng.random(k), -np.inf)
    hi = act + rng.random(k)
    eq = rng.random(k) < 0.2
    lo[eq] = hi[eq] = act[eq]
    c = rng.normal(size=n)
    # a missing lower bound only where minimization pushes the variable up
    lb = np.where((rng.random(n) < 0.3) & (c < 0), -np.inf, 0.0)
    ub = x0 + rng.random(n)
    Acsr = sp.csr_matrix(A)
    Acsr.eliminate_zeros()
    return LinearModel(var_names=[f"x{i}" for i in range(n)], lb=lb, ub=ub,
                       row_names=[f"r{i}" for i in range(k)], A=Acsr, row_lo=lo, row_hi=hi,
                       sense="minimize", c=c, c0=0.0, start=None)


def highs(m):
    A = m.A.toarray()
    ub_rows = np.isfinite(m.row_hi) & (m.row_lo != m.row_hi)
    lb_rows = np.isfinite(m.row_lo) & (m.row_lo != m.row_hi)
    eq = m.row_lo == m.row_hi
    A_ub = np.vstack([A[ub_rows], -A[lb_rows]])
    b_ub = np.concatenate([m.row_hi[ub_rows], -m.row_lo[lb_rows]])
    res = scipy.optimize.linprog(m.c, A_ub=A_ub if len(b_ub) else None, b_ub=b_ub if len(b_ub) else None,
                                 A_eq=A[eq] if eq.any() else None, b_eq=m.row_lo[eq] if eq.any() else None,
                                 bounds=list(zip(np.where(np.isfinite(m.lb), m.lb, None),
                                                 np.where(np.isfinite(m.ub), m.ub, None))),
                                 method="highs")
    assert res.status == 0
    return res.fun


@settings(max_examples=30)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 12), k=st.integers(1, 10))
def test_matches_external_solver(seed, n, k):
    m = random_lp(seed, n, k)
    sol = solve(m)
    assert sol.status == "optimal"
    ref = highs(m)
    assert sol.primal_objective == pytest.approx(ref, rel=1e-6, abs=1e-6)
    assert gap_ok(sol)
    # weak duality at the returned point (minimization form)
    assert sol.dual_objective <= sol.primal_objective + 1e-9 * (1 + abs(sol.primal_objective))
    x = sol.x
    act = m.A @ x
    assert np.all(act >= m.row_lo - 1e-7) and np.all(act <= m.row_hi + 1e-7)
    assert np.all(x >= m.lb - 1e-8) and np.all(x <= m.ub + 1e-8)


@settings(max_examples=10)
@given(seed=st.integers(0, 10 ** 6))
def test_dense_and_sparse_paths_agree(seed):
    m = random_lp(seed, 8, 6)
    m = LinearModel(**{**m.__dict__, "lb": np.zeros(8)})
    a = solve(m, SolverConfig(path="dense"))
    b = solve(m, SolverConfig(path="sparse"))
    assert a.status == b.status == "optimal"
    assert a.primal_objective == pytest.approx(b.primal_objective, rel=1e-7, abs=1e-7)
