#!/usr/bin/env python3
"""
Operator assembly, coercivity and first-eigenpair tests
"""
import math

import numpy as np
import pytest

from eigensolver import (
    FirstEigenSolver,
    SolverOptions,
    assemble,
    coercivity_check,
    positivity_check,
    rayleigh,
    simplicity_check,
    solve_dense,
    solve_first,
)
from errors import NoPositiveDirectionError, NonCoerciveError, NonPositiveDenominatorError
from geometry import DomainMask, Grid2D, make_box_mask, make_disk_mask
from rearrangement import ScalarField
from test_geometry import run_tests

J01_SQUARED = 2.404825557695773 ** 2


def unit_square(n_interior: int) -> DomainMask:
    return make_box_mask(Grid2D.unit_square(n_interior))


def test_single_cell_operator():
    mask = DomainMask(Grid2D(3, 3, 1.0), np.pad([[True]], 1))
    zero = ScalarField.constant(mask, 0.0)
    op, diagonal = assemble(mask, zero, ScalarField.constant(mask, 1.0))
    assert op.dense().tolist() == [[4.0]]
    shifted, _ = assemble(mask, ScalarField.constant(mask, 2.5), zero)
    assert shifted.dense().tolist() == [[6.5]]
    assert diagonal.tolist() == [1.0]


def test_operator_is_symmetric_five_point():
    mask = make_disk_mask(Grid2D.centered(9, 0.5), None, 1.6)
    V = ScalarField(mask, np.linspace(0.0, 1.0, mask.count))
    op, _ = assemble(mask, V, ScalarField.constant(mask, 1.0))
    dense = op.dense()
    assert np.array_equal(dense, dense.T)
    assert max(np.count_nonzero(row) for row in dense) <= 5


def test_closed_form_three_by_three():
    mask = unit_square(3)
    expected = 128 * math.sin(math.pi / 8) ** 2
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), ScalarField.constant(mask, 1.0))
    report = coercivity_check(op)
    assert report.lambda_min_A == pytest.approx(expected, rel=1e-8)
    assert report.delta0 >= 1.0
    result = solve_first(op, ScalarField.constant(mask, 1.0))
    assert result.lam == pytest.approx(expected, rel=1e-10)
    assert positivity_check(result.phi)
    assert np.linalg.norm(result.phi.values) == pytest.approx(1.0)


def test_power_matches_dense_oracle():
    rng = np.random.default_rng(21)
    solver = FirstEigenSolver(SolverOptions(tol=1e-10))
    for _ in range(20):
        n = int(rng.integers(6, 12))
        mask = make_disk_mask(Grid2D.centered(n, 1.0), None, float(rng.uniform(1.5, (n - 1) / 2 - 1)))
        assert mask.count <= 60
        g = ScalarField(mask, rng.uniform(0.1, 2.0, mask.count))
        V = ScalarField(mask, rng.uniform(0.0, 3.0, mask.count))
        both = solver.solve(g, V, method="both")
        assert both['lambda_gap'] <= 1e-10
        assert both['phi_gap'] <= 1e-8


def test_sign_changing_weight():
    mask = make_disk_mask(Grid2D.centered(9, 1.0), None, 3.5)
    g = ScalarField(mask, np.where(np.arange(mask.count) % 3 == 0, -0.5, 1.0))
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), g)
    power = solve_first(op, g)
    dense = solve_dense(op, g)
    assert power.lam == pytest.approx(dense.lam, rel=1e-9)
    assert positivity_check(power.phi)


def test_no_positive_direction():
    mask = make_disk_mask(Grid2D.centered(7, 1.0), None, 2.0)
    g = ScalarField.constant(mask, -1.0)
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), g)
    with pytest.raises(NoPositiveDirectionError):
        solve_first(op, g)
    with pytest.raises(NoPositiveDirectionError):
        solve_dense(op, g)


def test_non_coercive_potential():
    mask = unit_square(3)
    lowest = 128 * math.sin(math.pi / 8) ** 2
    V = ScalarField.constant(mask, -(lowest + 1.0))
    op, _ = assemble(mask, V, ScalarField.constant(mask, 1.0))
    with pytest.raises(NonCoerciveError):
        coercivity_check(op)
    with pytest.raises(NonCoerciveError):
        solve_first(op, ScalarField.constant(mask, 1.0))


def test_negative_potential_margin():
    mask = unit_square(3)
    lowest = 128 * math.sin(math.pi / 8) ** 2
    op, _ = assemble(mask, ScalarField.constant(mask, -lowest / 2), ScalarField.constant(mask, 1.0))
    report = coercivity_check(op)
    assert report.delta0 == pytest.approx(0.5, rel=1e-7)


def test_rayleigh_denominator():
    mask = make_disk_mask(Grid2D.centered(7, 1.0), None, 2.0)
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), ScalarField.constant(mask, 1.0))
    with pytest.raises(NonPositiveDenominatorError):
        rayleigh(op, ScalarField.constant(mask, 0.0), ScalarField.constant(mask, 1.0))


def test_simplicity():
    mask = make_disk_mask(Grid2D.centered(11, 0.25), None, 1.0)
    g = ScalarField(mask, np.linspace(0.5, 1.5, mask.count))
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), g)
    report = simplicity_check(op, g, trials=4)
    assert report.passed
    assert report.min_abs_cos > 1 - 1e-8


def test_unit_square_convergence():
    errors = []
    for n in (16, 32, 64, 128):
        mask = unit_square(n - 1)
        g = ScalarField.constant(mask, 1.0)
        op, _ = assemble(mask, ScalarField.constant(mask, 0.0), g)
        lam = solve_first(op, g, SolverOptions(tol=1e-9)).lam
        h = 1.0 / n
        assert lam == pytest.approx(8 / h ** 2 * math.sin(math.pi * h / 2) ** 2, rel=1e-7)
        errors.append(abs(lam - 2 * math.pi ** 2))
    assert errors[-1] <= 0.01 * 2 * math.pi ** 2
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert min(orders) >= 1.9


def test_unit_disk():
    mask = make_disk_mask(Grid2D.covering(1.0, 128), None, 1.0)
    g = ScalarField.constant(mask, 1.0)
    op, _ = assemble(mask, ScalarField.constant(mask, 0.0), g)
    lam = solve_first(op, g, SolverOptions(tol=1e-9)).lam
    assert abs(lam - J01_SQUARED) <= 0.02 * J01_SQUARED


def test_first_eigenvalue_minimizes_rayleigh():
    rng = np.random.default_rng(41)
    mask = make_disk_mask(Grid2D.centered(15, 0.2), None, 1.2)
    g = ScalarField(mask, rng.uniform(0.2, 2.0, mask.count))
    V = ScalarField(mask, rng.uniform(0.0, 4.0, mask.count))
    op, _ = assemble(mask, V, g)
    lam = solve_first(op, g, SolverOptions(tol=1e-10)).lam
    for _ in range(100):
        psi = ScalarField(mask, rng.normal(size=mask.count))
        assert rayleigh(op, g, psi) >= lam * (1 - 1e-9)


def test_residual_contract():
    rng = np.random.default_rng(42)
    tol = 1e-9
    for _ in range(10):
        n = int(rng.integers(10, 20))
        mask = make_disk_mask(Grid2D.centered(n, 1.0), None, float(rng.uniform(2.0, (n - 1) / 2 - 1)))
        g = ScalarField(mask, rng.uniform(0.1, 2.0, mask.count))
        V = ScalarField(mask, rng.uniform(0.0, 1.0, mask.count))
        op, _ = assemble(mask, V, g)
        result = solve_first(op, g, SolverOptions(tol=tol, seed=int(rng.integers(1000))))
        phi = result.phi.values
        Aphi = op.apply(phi)
        assert result.residual <= tol * 1.01
        assert np.linalg.norm(Aphi - result.lam * g.values * phi) <= tol * 1.01 * np.linalg.norm(Aphi)
        assert float(np.dot(g.values, phi * phi)) > 0
        assert positivity_check(result.phi)


def test_operator_apply_is_symmetric():
    rng = np.random.default_rng(43)
    mask = make_disk_mask(Grid2D.centered(13, 0.5), None, 2.5)
    V = ScalarField(mask, rng.uniform(-1.0, 3.0, mask.count))
    op, _ = assemble(mask, V, ScalarField.constant(mask, 1.0))
    for _ in range(50):
        x = rng.normal(size=mask.count)
        y = rng.normal(size=mask.count)
        assert float(x @ op.apply(y)) == pytest.approx(float(y @ op.apply(x)), rel=1e-12, abs=1e-9)


def main():
    tests = [
        ("single cell operator", test_single_cell_operator),
        ("symmetric five-point operator", test_operator_is_symmetric_five_point),
        ("closed form 3×3", test_closed_form_three_by_three),
        ("dense oracle", test_power_matches_dense_oracle),
        ("sign-changing weight", test_sign_changing_weight),
        ("no positive direction", test_no_positive_direction),
        ("non-coercive potential", test_non_coercive_potential),
        ("negative potential margin", test_negative_potential_margin),
        ("rayleigh denominator", test_rayleigh_denominator),
        ("simplicity", test_simplicity),
        ("unit square convergence", test_unit_square_convergence),
        ("unit disk", test_unit_disk),
        ("minimum principle", test_first_eigenvalue_minimizes_rayleigh),
        ("residual contract", test_residual_contract),
        ("apply symmetry", test_operator_apply_is_symmetric),
    ]
    return run_tests("Eigensolver", tests)


if __name__ == "__main__":
    raise SystemExit(main())
