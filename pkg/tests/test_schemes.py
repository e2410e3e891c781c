import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ellopt.errors import SimpsonParityError, UnsupportedReductionError
from ellopt.grid import Grid, from_values, sample, zeros
from ellopt import linsolve, operators, schemes, study

ALPHA = 0.1


def _data(g, seed=0):
    rng = np.random.default_rng(seed)
    return (
        from_values(g, rng.standard_normal(g.interior_count)),
        from_values(g, rng.standard_normal(g.interior_count)),
    )


def test_od2_blocks_match_display():
    g = Grid(2, 8)
    f, gdata = _data(g)
    system = schemes.assemble(schemes.SchemeSpec("od2", ALPHA), g, f, gdata)
    lap = operators.laplacian_5pt(g).matrix
    eye = operators.identity(g).matrix
    expected = [
        [-lap, None, -eye],
        [eye, -lap, None],
        [None, -eye, ALPHA * eye],
    ]
    for i in range(3):
        for j in range(3):
            got = system.blocks[i][j]
            if expected[i][j] is None:
                assert got is None
            else:
                assert np.abs(got - expected[i][j]).max() == 0.0
    np.testing.assert_array_equal(
        system.rhs, np.concatenate([f.values, gdata.values, np.zeros(g.interior_count)])
    )
    assert system.layout == ("z", "p", "u")


def test_do2_simp_gradient_row():
    g = Grid(2, 8)
    f, gdata = _data(g)
    system = schemes.assemble(schemes.SchemeSpec("do2-simp", ALPHA), g, f, gdata)
    Q = operators.simpson_q(g).matrix
    eye = operators.identity(g).matrix
    assert np.abs(system.blocks[2][1] + eye).max() == 0.0
    assert np.abs(system.blocks[2][2] - ALPHA * Q).max() == 0.0


@pytest.mark.parametrize("name", schemes.SCHEME_NAMES)
def test_zero_data_gives_zero_solution(name):
    g = Grid(2, 8)
    spec = schemes.SchemeSpec(name, ALPHA)
    system = schemes.assemble(spec, g, zeros(g), zeros(g))
    x, stats = linsolve.solve(system)
    assert np.all(x == 0.0)
    assert stats.final_relative_residual == 0.0


def test_constraint_blocks_transposed_in_adjoint_rows():
    # DO systems: adjoint/gradient rows carry the transposed constraint blocks
    g = Grid(2, 8)
    f, gdata = _data(g)
    for name in ("do2-trap", "do2-simp", "do4-trap", "do4-simp",
                 "do2-trap-reg", "do2-simp-reg", "do4-trap-reg", "do4-simp-reg"):
        system = schemes.assemble(schemes.SchemeSpec(name, ALPHA), g, f, gdata)
        Cz, Cu = system.blocks[0][0], system.blocks[0][2]
        assert np.abs(system.blocks[1][1] - Cz.T).max() == 0.0
        assert np.abs(system.blocks[2][1] - Cu.T).max() == 0.0
        # (z, u) Hessian blocks symmetric
        for blk in (system.blocks[1][0], system.blocks[2][2]):
            gap = np.abs(blk - blk.T)
            assert gap.nnz == 0 or gap.max() == 0.0


def test_od4_reduced_blocks():
    g = Grid(2, 8)
    f, gdata = _data(g)
    system = schemes.assemble_reduced(schemes.SchemeSpec("od4", ALPHA), g, f, gdata)
    F = operators.compact_f(g).matrix
    R = operators.compact_r(g).matrix
    assert np.abs(system.blocks[0][0] - F).max() == 0.0
    assert np.abs(system.blocks[0][1] + R).max() == 0.0
    assert np.abs(system.blocks[1][0] - R).max() == 0.0
    assert np.abs(system.blocks[1][1] - ALPHA * F).max() == 0.0
    np.testing.assert_array_equal(
        system.rhs, np.concatenate([R @ f.values, R @ gdata.values])
    )
    assert system.layout == ("z", "u")


def test_do4_trap_reduced_equals_od4_reduced():
    g = Grid(2, 10)
    f, gdata = _data(g)
    a = schemes.assemble_reduced(schemes.SchemeSpec("do4-trap", ALPHA), g, f, gdata)
    b = schemes.assemble_reduced(schemes.SchemeSpec("od4", ALPHA), g, f, gdata)
    gap = np.abs(a.matrix - b.matrix)
    scale = np.max(np.abs(b.matrix.data))
    assert (gap.nnz == 0 or gap.max() <= 1e-12 * scale)
    np.testing.assert_array_equal(a.rhs, b.rhs)


def test_do2_trap_reg_reduced_matches_od2_after_normalization():
    # left-multiplying the reduced reg adjoint row by (I - gamma lap)^-1
    # recovers the od2 reduced row; checked on 20 random vectors
    g = Grid(2, 10)
    f, gdata = _data(g)
    reg = schemes.assemble_reduced(schemes.SchemeSpec("do2-trap-reg", ALPHA), g, f, gdata)
    od = schemes.assemble_reduced(schemes.SchemeSpec("od2", ALPHA), g, f, gdata)
    MI = operators.reg_mass("identity", 1.0, g).matrix.tocsc()
    count = g.interior_count
    reg_row2 = sp.hstack([reg.blocks[1][0], reg.blocks[1][1]]).tocsr()
    od_row2 = sp.hstack([od.blocks[1][0], od.blocks[1][1]]).tocsr()
    rng = np.random.default_rng(11)
    lu = spla.splu(MI)
    for _ in range(20):
        v = rng.standard_normal(2 * count)
        w1 = lu.solve(reg_row2 @ v)
        w2 = od_row2 @ v
        assert np.max(np.abs(w1 - w2)) <= 1e-10 * max(1.0, np.max(np.abs(w2)))


def test_reduction_unsupported_for_plain_simpson():
    g = Grid(2, 8)
    f, gdata = _data(g)
    for name in ("do2-simp", "do4-simp"):
        with pytest.raises(UnsupportedReductionError):
            schemes.assemble_reduced(schemes.SchemeSpec(name, ALPHA), g, f, gdata)
    assert not schemes.supports_reduction("do2-simp")
    assert schemes.supports_reduction("do4-simp-reg")


def test_reduced_solution_matches_full(ex2):
    # data vanish on the boundary, so reduced and full (z, u) coincide
    for name in ("do2-trap", "do4-trap", "do2-trap-reg", "do2-simp-reg",
                 "do4-trap-reg", "do4-simp-reg", "od2", "od4"):
        spec = schemes.SchemeSpec(name, ex2.alpha)
        full, _ = study.solve_scheme(spec, ex2, 16, via="full")
        red, _ = study.solve_scheme(spec, ex2, 16, via="reduced")
        for fld in ("z", "u"):
            gap = np.max(np.abs(full[fld].values - red[fld].values))
            assert gap <= 1e-8, (name, fld, gap)


def test_residual_zero_at_solution():
    g = Grid(2, 12)
    f, gdata = _data(g, seed=5)
    system = schemes.assemble(schemes.SchemeSpec("do2-simp", ALPHA), g, f, gdata)
    x, _ = linsolve.solve(system)
    fields = system.split(x)
    res = schemes.residual(system, **fields)
    assert np.max(np.abs(res)) <= 1e-9 * max(1.0, np.max(np.abs(system.rhs)))
    zero_sys = schemes.assemble(schemes.SchemeSpec("do2-trap", ALPHA), g, zeros(g), zeros(g))
    res0 = schemes.residual(
        zero_sys, z=zeros(g), p=zeros(g), u=zeros(g)
    )
    assert np.all(res0 == 0.0)


def test_recover_adjoint_identity_schemes():
    g = Grid(2, 8)
    rng = np.random.default_rng(9)
    u = from_values(g, rng.standard_normal(g.interior_count))
    p = schemes.recover_adjoint(schemes.SchemeSpec("od2", ALPHA), g, u)
    np.testing.assert_array_equal(p.values, ALPHA * u.values)
    p0 = schemes.recover_adjoint(schemes.SchemeSpec("do4-trap", ALPHA), g, zeros(g))
    assert np.all(p0.values == 0.0)


def test_recover_adjoint_do4_trap_second_order(ex2):
    # R p = alpha u makes p differ from alpha*u at second order
    errs = {}
    for n in (20, 40):
        g = Grid(2, n)
        from ellopt.problems import exact_on_grid

        u = exact_on_grid(ex2, "u", g)
        p = schemes.recover_adjoint(schemes.SchemeSpec("do4-trap", ex2.alpha), g, u)
        errs[n] = np.max(np.abs(p.values - ex2.alpha * u.values))
    order = np.log(errs[20] / errs[40]) / np.log(2.0)
    assert order == pytest.approx(2.0, abs=0.3)


@pytest.mark.parametrize(
    "reg_name,plain_name",
    [
        ("do2-trap-reg", "do2-trap"),
        ("do2-simp-reg", "do2-simp"),
        ("do4-trap-reg", "do4-trap"),
        ("do4-simp-reg", "do4-simp"),
    ],
)
def test_reg_gamma_zero_reproduces_unregularized(reg_name, plain_name):
    g = Grid(2, 8)
    f, gdata = _data(g, seed=2)
    reg = schemes.assemble(
        schemes.SchemeSpec(reg_name, ALPHA, gamma_rule=("fixed", 0.0)), g, f, gdata
    )
    plain = schemes.assemble(schemes.SchemeSpec(plain_name, ALPHA), g, f, gdata)
    gap = np.abs(reg.matrix - plain.matrix)
    assert gap.nnz == 0 or gap.max() == 0.0
    np.testing.assert_array_equal(reg.rhs, plain.rhs)


def test_simpson_parity_at_assembly():
    g = Grid(2, 9)
    f, gdata = _data(g, seed=3)
    with pytest.raises(SimpsonParityError, match="even"):
        schemes.assemble(schemes.SchemeSpec("do4-simp-reg", ALPHA), g, f, gdata)


def test_gamma_resolution():
    spec2 = schemes.SchemeSpec("do2-simp-reg", ALPHA)
    spec4 = schemes.SchemeSpec("do4-simp-reg", ALPHA)
    g = Grid(2, 20)
    assert schemes.resolve_gamma(spec2, g) == 1.0
    assert schemes.resolve_gamma(spec4, g) == 400.0
    fixed = schemes.SchemeSpec("do4-trap-reg", ALPHA, gamma_rule=("fixed", 7.0))
    assert schemes.resolve_gamma(fixed, g) == 7.0
    assert schemes.resolve_gamma(schemes.SchemeSpec("od2", ALPHA), g) == 0.0


def test_simpson_inconsistency_witness():
    # ||(I - Q) w||_inf stays O(1) as the mesh refines
    field = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    gaps = study.simpson_gap(field, [20, 200])
    assert gaps[1] >= 0.9 * gaps[0]


def test_averaging_perturbation_witness():
    # ||(R - I) p||_inf = O(h^2) for smooth samples
    field = lambda x, y: np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    gaps, orders = study.averaging_gap_orders(field, [20, 40, 80])
    assert orders[0] == pytest.approx(2.0, abs=0.3)
    assert orders[1] == pytest.approx(2.0, abs=0.3)


def test_stability_bound_smallest_singular_value():
    for alpha in (0.1, 1.0, 10.0):
        audit = study.stability_audit(alpha, 8)
        assert audit.sigma_min >= audit.bound - 1e-10


def test_filter_matrix_deviation_runs():
    val = schemes.filter_matrix_deviation(Grid(2, 8), ALPHA)
    assert np.isfinite(val) and val >= 0.0
