import numpy as np
import pytest

from ellopt.errors import PreconditionError
from ellopt.grid import Grid, from_values, sample, zeros
from ellopt.objective import (
    ObjectiveSpec,
    eval_lagrangian,
    eval_objective,
    hessian_blocks,
    mass_operators,
)
from ellopt import linsolve, schemes

ALL_SPECS = [
    ObjectiveSpec("trapezoidal", 0.1),
    ObjectiveSpec("simpson", 0.1),
    ObjectiveSpec("trapezoidal", 0.1, "full", 1.0),
    ObjectiveSpec("simpson", 0.1, "full", 1.0),
    ObjectiveSpec("simpson", 0.1, "uonly", 0.01),
]


def test_spec_validation():
    with pytest.raises(PreconditionError):
        ObjectiveSpec("gauss", 0.1)
    with pytest.raises(PreconditionError):
        ObjectiveSpec("simpson", -1.0)
    with pytest.raises(PreconditionError):
        ObjectiveSpec("simpson", 0.1, "full", -0.5)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_perfect_tracking_is_zero(spec):
    g = Grid(2, 8)
    rng = np.random.default_rng(0)
    gdata = from_values(g, rng.standard_normal(g.interior_count))
    assert eval_objective(spec, gdata, zeros(g), gdata) == 0.0


def test_constant_offset_trapezoidal():
    g = Grid(2, 8)
    c = 0.7
    gdata = zeros(g)
    z = from_values(g, np.full(g.interior_count, c))
    spec = ObjectiveSpec("trapezoidal", 0.1)
    assert eval_objective(spec, z, zeros(g), gdata) == pytest.approx(
        0.5 * c**2 * g.interior_count, rel=1e-14
    )


def test_simpson_objective_converges_to_integral():
    # oracle: adaptive quadrature of the continuous 1/2 * integral (z - g)^2
    from scipy.integrate import dblquad

    field = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y) * np.exp(x + y)
    target = 0.5 * dblquad(
        lambda y, x: field(x, y) ** 2, 0.0, 1.0, 0.0, 1.0, epsabs=1e-12
    )[0]
    errs = []
    for n in (8, 16, 32):
        g = Grid(2, n)
        z = sample(field, g)
        spec = ObjectiveSpec("simpson", 1.0)
        val = g.h**2 * eval_objective(spec, z, zeros(g), zeros(g))
        errs.append(abs(val - target))
    order = np.log(errs[0] / errs[1]) / np.log(2.0)
    assert order >= 2.0 - 0.3
    assert errs[2] < errs[1] < errs[0]


def test_lagrangian_reduces_to_objective():
    g = Grid(2, 8)
    rng = np.random.default_rng(1)

    def rand():
        return from_values(g, rng.standard_normal(g.interior_count))

    z, u, f, gdata = rand(), rand(), rand(), rand()
    spec = ObjectiveSpec("simpson", 0.1)
    sspec = schemes.SchemeSpec("do2-simp", 0.1)
    _, state_ops = schemes.objective_spec_for(sspec, g)
    j = eval_objective(spec, z, u, gdata)
    assert eval_lagrangian(spec, state_ops, z, u, zeros(g), f, gdata) == pytest.approx(j)


def test_lagrangian_at_exact_solution():
    # residual term vanishes when (z, u) solves the discrete state equation
    g = Grid(2, 16)
    rng = np.random.default_rng(2)
    u = from_values(g, rng.standard_normal(g.interior_count))
    f = from_values(g, rng.standard_normal(g.interior_count))
    gdata = from_values(g, rng.standard_normal(g.interior_count))
    import scipy.sparse.linalg as spla
    from ellopt import operators

    lap = operators.laplacian_5pt(g).matrix
    z = from_values(g, spla.spsolve((-lap).tocsc(), u.values + f.values))
    p = from_values(g, rng.standard_normal(g.interior_count))
    spec = ObjectiveSpec("trapezoidal", 0.1)
    sspec = schemes.SchemeSpec("do2-trap", 0.1)
    _, state_ops = schemes.objective_spec_for(sspec, g)
    LJ = eval_lagrangian(spec, state_ops, z, u, p, f, gdata)
    assert LJ == pytest.approx(eval_objective(spec, z, u, gdata), rel=1e-9)


@pytest.mark.parametrize("name", ["do2-trap", "do2-simp", "do4-simp-reg"])
def test_fd_gradient_matches_residual(name):
    # central differences (step 1e-6) against the assembled KKT rows
    g = Grid(2, 8)
    rng = np.random.default_rng(3)
    count = g.interior_count
    f = from_values(g, rng.standard_normal(count))
    gdata = from_values(g, rng.standard_normal(count))
    sspec = schemes.SchemeSpec(name, 0.1)
    system = schemes.assemble(sspec, g, f, gdata)
    ospec, state_ops = schemes.objective_spec_for(sspec, g)

    z = rng.standard_normal(count)
    u = rng.standard_normal(count)
    p = rng.standard_normal(count)
    res = schemes.residual(system, z=z, p=p, u=u)
    res_state, res_adj, res_grad = np.split(res, 3)

    def L(zv, uv, pv):
        return eval_lagrangian(ospec, state_ops, zv, uv, pv, f.values, gdata.values, g)

    h = 1e-6
    for per_coord, block in (
        (lambda k, s: L(_pert(z, k, s), u, p), res_adj),
        (lambda k, s: L(z, _pert(u, k, s), p), res_grad),
        (lambda k, s: L(z, u, _pert(p, k, s)), res_state),
    ):
        for k in range(0, count, 7):  # spot-check coordinates
            fd = (per_coord(k, h) - per_coord(k, -h)) / (2 * h)
            assert abs(fd - block[k]) <= 1e-6 * (1.0 + abs(block[k]))


def _pert(v, k, s):
    out = v.copy()
    out[k] += s
    return out


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_objective_strictly_convex(spec):
    g = Grid(2, 8 if spec.quadrature == "simpson" else 7)
    Hz, Hu = hessian_blocks(spec, g)
    assert np.linalg.eigvalsh(Hz.toarray()).min() > 0
    assert np.linalg.eigvalsh(Hu.toarray()).min() > 0


def test_mass_operators_uonly_grouping():
    # u-only reg leaves the state weights alone and penalizes the control
    g = Grid(2, 8)
    spec = ObjectiveSpec("simpson", 0.1, "uonly", 0.25)
    Mz, Mu = mass_operators(spec, g)
    from ellopt import operators

    assert np.abs(Mz - operators.simpson_q(g).matrix).max() == 0.0
    expected = operators.simpson_q(g).matrix - 0.25 * operators.laplacian_5pt(g).matrix
    assert np.abs(Mu - expected).max() == 0.0
