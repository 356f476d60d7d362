import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from ffopt.lp_solver import SolverConfig, solve
from ffopt.lp_solver.mps import MPSExportError, MPSParseError, export_mps, parse_mps, read_mps, write_mps
from ffopt.mask_lp import MaskProblem, build_model
from ffopt.sparse_model import LinearModel, ModelBuilder, model_stats

ONE_VAR_GOLDEN = """\
NAME          one
OBJSENSE
    MAX
ROWS
 N  obj
 L  cap
COLUMNS
    x         obj                  1   cap                  1
RHS
    RHS       cap                  1
RANGES
BOUNDS
 UP BND       x                    2
ENDATA
"""


def one_var():
    b = ModelBuilder("one")
    b.add_variable("x", lb=0.0, ub=2.0)
    b.add_row("cap", {"x": 1.0}, hi=1.0)
    b.set_objective("maximize", {"x": 1.0})
    return b.build()


def same_model(a: LinearModel, b: LinearModel):
    assert a.sense == b.sense
    assert a.c0 == b.c0
    np.testing.assert_array_equal(a.c, b.c)
    np.testing.assert_array_equal(a.lb, b.lb)
    np.testing.assert_array_equal(a.ub, b.ub)
    np.testing.assert_array_equal(a.row_lo, b.row_lo)
    np.testing.assert_array_equal(a.row_hi, b.row_hi)
    assert (a.A != b.A).nnz == 0


def test_golden_fixed_format():
    assert export_mps(one_var()) == ONE_VAR_GOLDEN


def test_golden_parses_back():
    m = parse_mps(ONE_VAR_GOLDEN)
    same_model(m, one_var())
    assert list(m.var_names) == ["x"] and list(m.row_names) == ["cap"]


def test_empty_model():
    m = ModelBuilder("empty").build()
    back = parse_mps(export_mps(m))
    assert back.n_vars == 0 and back.n_rows == 0


def test_ranged_row_round_trip():
    b = ModelBuilder()
    b.add_variables(["x", "y"], lb=0.0, ub=5.0)
    b.add_row("band", {"x": 1.0, "y": 1.0}, lo=1.0, hi=3.0)
    b.set_objective("maximize", {"x": 1.0, "y": 2.0})
    m = b.build()
    text = export_mps(m)
    assert "RNG" in text and " G  band" in text
    back = parse_mps(text)
    same_model(back, m)
    assert solve(back).primal_objective == pytest.approx(6.0, abs=1e-7)


def test_ranges_on_equality_rows():
    text = "\n".join([
        "NAME t", "ROWS", " N obj", " E up", " E dn", " L le", "COLUMNS",
        "  x obj 1 up 1", "  x dn 1 le 1", "RHS", "  RHS up 2 dn 2", "  RHS le 4",
        "RANGES", "  RNG up 1 dn -1", "  RNG le 3", "ENDATA", ""])
    m = parse_mps(text)
    np.testing.assert_array_equal(m.row_lo, [2.0, 1.0, 1.0])
    np.testing.assert_array_equal(m.row_hi, [3.0, 2.0, 4.0])


def test_objective_constant_is_negated_rhs():
    b = ModelBuilder()
    b.add_variable("x", lb=1.0, ub=1.0)
    b.set_objective("minimize", {"x": 2.0}, constant=0.5)
    m = b.build()
    assert "RHS       obj               -0.5" in export_mps(m)
    assert parse_mps(export_mps(m)).c0 == 0.5


def test_unknown_section_reports_line():
    text = "NAME x\nROWS\n N obj\nWHATEVER\nENDATA\n"
    with pytest.raises(MPSParseError) as e:
        parse_mps(text)
    assert e.value.lineno == 4


@pytest.mark.parametrize("text", [
    "NAME x\nROWS\n N obj\n",                                        # no ENDATA
    "NAME x\nROWS\n Q r\nENDATA\n",                                  # bad row type
    "NAME x\nROWS\n N obj\nCOLUMNS\n  x nope 1\nENDATA\n",           # unknown row
    "NAME x\nROWS\n N obj\nCOLUMNS\n  x obj one\nENDATA\n",          # bad number
    "NAME x\nROWS\n N obj\nCOLUMNS\n  M 'MARKER' 'INTORG'\nENDATA\n",
    "NAME x\nROWS\n N obj\nCOLUMNS\n  x obj 1\nBOUNDS\n BV BND x\nENDATA\n",
])
def test_malformed_documents(text):
    with pytest.raises(MPSParseError):
        parse_mps(text)


def test_long_names_are_mangled_consistently():
    b = ModelBuilder()
    b.add_variables(["f[1,2]", "f[10,20]", "g h"], lb=0.0, ub=1.0)
    b.add_row("sidelobe_positive[3,4]", {"f[1,2]": 1.0, "f[10,20]": -1.0}, hi=0.0)
    b.add_row("r[1]", {"g h": 1.0}, hi=0.5)
    b.set_objective("maximize", {"f[1,2]": 1.0})
    m = b.build()
    text = export_mps(m)
    back = parse_mps(text)
    # short names only lose brackets and blanks; a single long name forces codes
    assert list(back.var_names) == ["f1_2", "f10_20", "gh"]
    assert list(back.row_names) == ["R0000000", "R0000001"]
    same_model(back, m)


def test_name_collision_raises():
    b = ModelBuilder()
    b.add_variables(["ab[1,2]", "ab1_2", "c d"], lb=0.0, ub=1.0)
    with pytest.raises(MPSExportError):
        export_mps(b.build())


def test_free_format_rejects_blanks():
    b = ModelBuilder()
    b.add_variable("c d", lb=0.0, ub=1.0)
    with pytest.raises(MPSExportError):
        export_mps(b.build(), free=True)
    # fixed format mangles instead
    assert parse_mps(export_mps(b.build())).var_names == ["cd"]


def test_free_format_keeps_long_names():
    p = MaskProblem(6, 4, rho0=1.0, rho1=4.0)
    m = build_model(p, "twostep")
    back = parse_mps(export_mps(m, free=True))
    assert list(back.var_names) == list(m.var_names)
    same_model(back, m)


def test_file_helpers(tmp_path):
    path = tmp_path / "one.mps"
    write_mps(one_var(), path)
    assert path.read_text() == ONE_VAR_GOLDEN
    same_model(read_mps(path), one_var())


def test_mask_export_stats_and_determinism():
    p = MaskProblem(12, 6, rho0=2.0, rho1=6.0)
    for form in ("onestep", "twostep"):
        m = build_model(p, form)
        a, b = export_mps(m), export_mps(build_model(p, form))
        assert a == b
        back = parse_mps(a)
        assert model_stats(back) == model_stats(m)
        assert export_mps(back) == a


bounds = st.sampled_from(["pos", "box", "free", "minus", "fixed", "negup"])


@st.composite
def random_models(draw):
    nv = draw(st.integers(1, 6))
    nr = draw(st.integers(0, 5))
    vals = st.floats(-50, 50, allow_nan=False).map(lambda v: float("%.6g" % v))
    b = ModelBuilder("rnd")
    for j in range(nv):
        kind = draw(bounds)
        lo, hi = {"pos": (0.0, np.inf), "box": (-1.5, 2.25), "free": (-np.inf, np.inf),
                  "minus": (-np.inf, 3.0), "fixed": (0.75, 0.75), "negup": (-4.0, -1.0)}[kind]
        b.add_variable(f"x{j}", lb=lo, ub=hi)
    for i in range(nr):
        dense = np.array([draw(vals) if draw(st.booleans()) else 0.0 for _ in range(nv)])
        kind = draw(st.sampled_from(["eq", "le", "ge", "range", "free"]))
        r = draw(vals)
        lo, hi = {"eq": (r, r), "le": (-np.inf, r), "ge": (r, np.inf),
                  "range": (r, r + 2.5), "free": (-np.inf, np.inf)}[kind]
        b.add_rows([f"r{i}"], sp.csr_matrix(dense.reshape(1, -1)), lo, hi)
    b.set_objective(draw(st.sampled_from(["minimize", "maximize"])),
                    {f"x{j}": draw(vals) for j in range(nv)}, constant=draw(vals))
    return b.build()


@given(random_models(), st.booleans())
def test_round_trip_is_idempotent(m, free):
    text = export_mps(m, free=free)
    back = parse_mps(text)
    same_model(back, m)
    assert export_mps(back, free=free) == text


def test_export_fidelity_small_masks():
    # tolerance-limited: compare at solver tolerances tighter than the 1e-9 target
    cfg = SolverConfig(rel_gap_tol=1e-11, feas_tol=1e-10)
    for args in [(20, 8, 2.0, 8.0), (40, 12, 4.0, 12.0)]:
        p = MaskProblem(args[0], args[1], rho0=args[2], rho1=args[3])
        for form in ("onestep", "twostep"):
            m = build_model(p, form)
            a = solve(m, cfg)
            b = solve(parse_mps(export_mps(m)), cfg)
            assert a.status == b.status == "optimal"
            assert abs(a.primal_objective - b.primal_objective) <= 1e-9


def test_external_solver_matches_embedded(tmp_path):
    highspy = pytest.importorskip("highspy")
    p = MaskProblem(40, 12, rho0=4.0, rho1=12.0)
    m = build_model(p, "twostep")
    path = tmp_path / "twostep.mps"
    write_mps(m, path)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert h.modelStatusToString(h.getModelStatus()) == "Optimal"
    ext = h.getInfo().objective_function_value
    own = solve(m).primal_objective
    assert abs(ext - own) <= 1e-6 * abs(own)
