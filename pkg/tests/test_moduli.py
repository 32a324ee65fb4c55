import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, sparse

from fluxlab.errors import ArgumentError
from fluxlab.fields import Box
from fluxlab.moduli import (
    GridSpec,
    SolverOptions,
    Surface,
    SurfaceFamily,
    annulus_modulus,
    annulus_spheres,
    assemble_constraints,
    check_monotone_subadditive,
    modulus,
    solve_modulus,
    sphere_surface,
)

TIGHT = SolverOptions(rel_gap=1e-8, max_iter=200000)


def test_annulus_closed_form_value():
    assert annulus_modulus(2, 1, 2, 2) == pytest.approx(np.log(2) / (2 * np.pi), rel=1e-15)
    # p = 1 gives b - a in any dimension
    assert annulus_modulus(3, 1, 3, 1) == pytest.approx(2.0)


def test_one_cell():
    # min v rho^p subject to m rho >= 1 gives v / m^p
    for p in (1.0, 1.5, 2.0, 3.0):
        sol = solve_modulus(sparse.csr_matrix([[2.0]]), np.array([0.5]), p, opts=TIGHT)
        assert sol.primal == pytest.approx(0.5 / 2.0**p, rel=1e-6)
        assert sol.converged


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_single_surface_matches_hoelder_extremal(p):
    rng = np.random.default_rng(int(p * 10))
    w, v = rng.uniform(0.1, 1, 7), rng.uniform(0.5, 2, 7)
    q = p / (p - 1)
    exact = np.sum(w**q * v ** (-1 / (p - 1))) ** (-(p - 1))
    sol = solve_modulus(sparse.csr_matrix(w[None]), v, p, opts=TIGHT)
    assert sol.primal == pytest.approx(exact, rel=1e-6)
    assert sol.dual <= sol.primal * (1 + 1e-12)


def test_single_surface_p_one_puts_mass_in_best_cell():
    w, v = np.array([0.3, 0.9, 0.5]), np.array([1.0, 2.0, 0.4])
    sol = solve_modulus(sparse.csr_matrix(w[None]), v, 1.0)
    assert sol.primal == pytest.approx(np.min(v / w), rel=1e-9)
    assert sol.method == "highs-lp"


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_small_problems_against_slsqp(seed):
    # oracle: general-purpose constrained minimizer on the same convex program
    rng = np.random.default_rng(seed)
    m, c = 3, 6
    W = rng.uniform(0, 1, (m, c)) * (rng.uniform(size=(m, c)) < 0.7)
    W[np.arange(m), rng.integers(0, c, m)] += 0.5
    v = rng.uniform(0.5, 1.5, c)
    ref = optimize.minimize(
        lambda r: v @ r**2, np.full(c, 2.0), jac=lambda r: 2 * v * r, method="SLSQP",
        bounds=[(0, None)] * c, constraints=[{"type": "ineq", "fun": lambda r: W @ r - 1, "jac": lambda r: W}],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    sol = solve_modulus(sparse.csr_matrix(W), v, 2.0, opts=TIGHT)
    assert sol.primal == pytest.approx(ref.fun, rel=1e-5)
    assert np.all(W @ sol.rho >= 1 - 1e-12)
    assert sol.dual <= sol.primal * (1 + 1e-12)


def test_empty_family_and_bad_exponent():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (4, 4))
    W = assemble_constraints(SurfaceFamily((), Box.cube(2, 1.0)), grid)
    assert W.shape == (0, 16)
    sol = solve_modulus(W, grid.cell_volumes(), 2.0)
    assert sol.primal == 0 and sol.method == "empty-family"
    with pytest.raises(ArgumentError):
        solve_modulus(sparse.csr_matrix([[1.0]]), np.ones(1), 0.5)


def test_surfaces_and_constraint_rows():
    s = sphere_surface([0.0, 0.0], 1.5, 400)
    assert s.measure == pytest.approx(3 * np.pi, rel=1e-14)
    fam = annulus_spheres(2, 1, 2, count=8, points_per_surface=512)
    grid = GridSpec.cover(fam.bbox, 40)
    W = assemble_constraints(fam, grid)
    assert np.allclose(np.asarray(W.sum(axis=1)).ravel(), [x.measure for x in fam.surfaces], rtol=1e-13)
    with pytest.raises(ArgumentError):
        assemble_constraints(fam, GridSpec((0.0, 0.0), (1.0, 1.0), (4, 4)))
    with pytest.raises(ArgumentError):
        SurfaceFamily((Surface(np.zeros((1, 2)), np.array([-1.0])),), Box.cube(2, 1.0))
    with pytest.raises(ArgumentError):
        SurfaceFamily((sphere_surface([0.0, 0.0], 3.0, 16),), Box.cube(2, 1.0))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_dilation_scaling(p):
    # scaling lengths by s multiplies the discrete modulus by s^(n - p(n-1)) exactly
    s = 2.5
    small = annulus_spheres(2, 1, 2, count=6, points_per_surface=256)
    big = annulus_spheres(2, s, 2 * s, count=6, points_per_surface=256)
    m0 = modulus(small, GridSpec.cover(small.bbox, 24), p, TIGHT)
    m1 = modulus(big, GridSpec.cover(big.bbox, 24), p, TIGHT)
    assert m1.primal == pytest.approx(m0.primal * s ** (2 - p), rel=1e-6)


def _solve(family, cells=60, p=2.0):
    grid = GridSpec(tuple(-np.full(2, 2.0)), tuple(np.full(2, 2.0)), (cells, cells))
    return modulus(family, grid, p)


def test_monotone_and_subadditive():
    fam = annulus_spheres(2, 1, 2, count=16, points_per_surface=1024)
    inner = SurfaceFamily(fam.surfaces[:8], fam.bbox, "inner")
    outer = SurfaceFamily(fam.surfaces[8:], fam.bbox, "outer")
    m_all, m_in, m_out = _solve(fam), _solve(inner), _solve(outer)
    dup = _solve(inner.union(inner))
    report = check_monotone_subadditive(
        nested=[(m_in, m_all), (m_out, m_all)], unions=[(m_in, m_out, m_all), (m_in, m_in, dup)]
    )
    assert report["ok"]
    # duplicating surfaces changes nothing
    assert dup.primal == pytest.approx(m_in.primal, rel=1e-3)
    bad = check_monotone_subadditive(nested=[(m_all, m_in)])
    assert not bad["ok"]


def test_solution_feasibility_and_bracketing():
    fam = annulus_spheres(2, 1, 2, count=16, points_per_surface=1024)
    sol = _solve(fam, 80)
    W = assemble_constraints(fam, sol.grid)
    assert np.all(W @ sol.rho >= 1 - 1e-12) and np.all(sol.rho >= 0)
    assert sol.dual <= sol.primal and sol.gap <= 1e-4 * sol.primal
    d = sol.to_dict()
    assert d["primal"] == sol.primal and d["status"] == "converged"


def test_annulus_refinement_trend():
    exact = annulus_modulus(2, 1, 2, 2)
    fam = annulus_spheres(2, 1, 2, count=64)
    errs = [abs(_solve(fam, k).primal - exact) for k in (50, 100, 200)]
    assert errs[0] >= errs[1] >= errs[2]
    assert errs[2] <= 0.02 * exact
