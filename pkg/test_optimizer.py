#!/usr/bin/env python3
"""
Alternating eigenvalue optimization tests
"""
from types import SimpleNamespace

import numpy as np
import pytest

from errors import NegativeValueError, NoPositiveDirectionError
from eigensolver import SolverOptions
from geometry import DomainMask, Grid2D, make_annulus_mask, make_disk_mask
from optimizer import (
    MAXIMIZE,
    OptProblem,
    argmax_in_segment,
    ball_mismatch,
    brute_force_optimum,
    check_monotone_coupling,
    maximize_lambda,
    minimize_lambda,
    rearrangement_weight,
    symmetry_report,
)
from rearrangement import ScalarField, extremal_max, extremal_min, pairing
from test_geometry import run_tests


def block_mask() -> DomainMask:
    """2×2 내부 블록"""
    inside = np.zeros((4, 4), dtype=bool)
    inside[1:3, 1:3] = True
    return DomainMask(Grid2D(4, 4, 1.0), inside)


def strip_mask() -> DomainMask:
    """2×3 내부 블록"""
    inside = np.zeros((4, 5), dtype=bool)
    inside[1:3, 1:4] = True
    return DomainMask(Grid2D(5, 4, 1.0), inside)


def chi(mask: DomainMask, fraction: float, value: float = 1.0) -> ScalarField:
    values = np.zeros(mask.count)
    values[:int(np.ceil(fraction * mask.count))] = value
    return ScalarField(mask, values)


def test_singleton_classes_take_one_solve():
    mask = make_disk_mask(Grid2D.covering(1.0, 24), None, 1.0)
    problem = OptProblem.from_fields(ScalarField.constant(mask, 1.0), ScalarField.constant(mask, 2.0))
    trace = minimize_lambda(problem)
    assert trace.iterations == 1
    assert trace.status == "converged"
    assert trace.lam == trace.records[0].lam

    problem = OptProblem.from_fields(ScalarField.constant(mask, 1.0), ScalarField.constant(mask, 2.0),
                                     direction=MAXIMIZE)
    assert maximize_lambda(problem).lam == trace.lam


def test_problem_validation():
    mask = block_mask()
    with pytest.raises(NoPositiveDirectionError):
        OptProblem.from_fields(ScalarField.constant(mask, 0.0), ScalarField.constant(mask, 0.0))
    with pytest.raises(NegativeValueError):
        OptProblem.from_fields(ScalarField.constant(mask, 1.0), ScalarField(mask, [1.0, -1.0, 0.0, 0.0]))
    with pytest.raises(NegativeValueError):
        OptProblem.from_fields(ScalarField(mask, [2.0, 1.0, -1.0, 0.0]), ScalarField.constant(mask, 0.0),
                               direction=MAXIMIZE)


def test_four_cell_toy_matches_brute_force():
    mask = block_mask()
    g0 = ScalarField(mask, [2.0, 1.0, 1.0, 0.0])
    V0 = ScalarField.constant(mask, 0.0)
    problem = OptProblem.from_fields(g0, V0)
    assert problem.g_class.member_count() == 12
    trace = minimize_lambda(problem)
    best, _, _ = brute_force_optimum(problem)
    assert trace.lam == pytest.approx(best, rel=1e-9)

    problem = OptProblem.from_fields(g0, V0, direction=MAXIMIZE)
    trace = maximize_lambda(problem)
    best, _, _ = brute_force_optimum(problem)
    assert trace.lam >= (1 - 1e-9) * best
    if trace.status == "converged":
        assert trace.lam == pytest.approx(best, rel=1e-9)


def test_small_instances_reach_exhaustive_minimum():
    mask = strip_mask()
    rng = np.random.default_rng(13)
    for seed in range(10):
        g0 = ScalarField(mask, rng.permutation([2.0, 1.0, 0.0, 0.0, 0.0, 0.0]))
        V0 = ScalarField.constant(mask, float(rng.uniform(0.0, 2.0)))
        problem = OptProblem.from_fields(g0, V0, seed=seed, solver=SolverOptions(seed=seed))
        assert problem.g_class.member_count() * problem.V_class.member_count() <= 30
        trace = minimize_lambda(problem)
        best, _, _ = brute_force_optimum(problem)
        assert trace.lam == pytest.approx(best, rel=1e-9)


def test_minimization_trace_is_monotone_and_feasible():
    rng = np.random.default_rng(17)
    for seed in range(5):
        mask = make_disk_mask(Grid2D.covering(1.0, int(rng.integers(16, 28))), None, 1.0)
        g0 = ScalarField(mask, rng.permutation(chi(mask, 0.3).values))
        V0 = ScalarField(mask, rng.permutation(chi(mask, 0.2, 3.0).values))
        problem = OptProblem.from_fields(g0, V0, seed=seed, solver=SolverOptions(seed=seed))
        trace = minimize_lambda(problem)
        lambdas = trace.lambdas
        assert all(b <= a * (1 + 1e-9) for a, b in zip(lambdas, lambdas[1:]))
        assert trace.lam <= lambdas[0]
        assert problem.g_class.contains(trace.g)
        assert problem.V_class.contains(trace.V)


def test_fixed_point_coupling():
    mask = make_disk_mask(Grid2D.covering(1.0, 24), None, 1.0)
    problem = OptProblem.from_fields(chi(mask, 0.3), chi(mask, 0.2, 2.0), tol_lambda=0.0)
    trace = minimize_lambda(problem)
    tie = 1e-6 * float(trace.phi.values.max())
    assert check_monotone_coupling(trace.phi, trace.g, phi_tol=tie)
    assert check_monotone_coupling(trace.phi, trace.V, decreasing=True, phi_tol=tie)
    # 고정점에서 g, V 는 φ² 에 대해 (동률 오차 안에서) 극값 배치다
    weight = rearrangement_weight(trace.phi)
    squared = trace.phi.with_values(trace.phi.values ** 2)
    slack = 1e-5 * float(squared.values.sum())
    assert pairing(extremal_max(problem.g_class, weight), squared) == pytest.approx(pairing(trace.g, squared), abs=slack)
    assert pairing(extremal_min(problem.V_class, weight), squared) == pytest.approx(pairing(trace.V, squared), abs=slack)


def test_monotone_coupling_detects_violations():
    mask = strip_mask()
    phi = ScalarField(mask, np.arange(1.0, 7.0))
    assert check_monotone_coupling(phi, ScalarField(mask, np.arange(6.0)))
    assert not check_monotone_coupling(phi, ScalarField(mask, np.arange(6.0)[::-1]))
    assert check_monotone_coupling(phi, ScalarField(mask, np.arange(6.0)[::-1]), decreasing=True)
    assert check_monotone_coupling(phi, ScalarField.constant(mask, 1.0))
    ties = ScalarField(mask, [1.0, 1.0, 2.0, 2.0, 3.0, 3.0])
    assert check_monotone_coupling(ties, ScalarField(mask, [1.0, 0.0, 3.0, 2.0, 5.0, 4.0]))


def test_disk_minimizer_is_centered_ball():
    mask = make_disk_mask(Grid2D.covering(1.0, 48), None, 1.0)
    trace = minimize_lambda(OptProblem.from_fields(chi(mask, 0.3), ScalarField.constant(mask, 0.0)))
    report = symmetry_report(trace, SimpleNamespace(domain="disk"))
    assert report['schwarz_defect_phi'] <= 0.02
    assert report['ball_mismatch'] <= 0.05
    assert ball_mismatch(trace.g) == report['ball_mismatch']


def test_nonconcentric_argmax_on_segment():
    scenario = SimpleNamespace(domain="annulus", R=1.0, r=0.3, t=0.2)
    mask = make_annulus_mask(Grid2D.covering(1.0, 96), 1.0, 0.3, 0.2)
    for seed in range(3):
        problem = OptProblem.from_fields(chi(mask, 0.3), ScalarField.constant(mask, 0.0),
                                         seed=seed, solver=SolverOptions(seed=seed))
        report = symmetry_report(minimize_lambda(problem), scenario)
        assert report['argmax_in_L_Omega']
        assert report['foliation_axis'] == [-1, 0]
        x1, x2 = report['argmax_location']
        assert -0.55 - mask.grid.h <= x1 < -0.1 + mask.grid.h


def test_segment_excludes_positive_axis():
    # t > r: t − r 가 양수여도 L_Ω 는 음의 x1 반직선 위에 있다
    mask = make_annulus_mask(Grid2D.covering(1.0, 97), 1.0, 0.3, 0.5)
    dx, dy = mask.offsets()

    def peaked_at(x1):
        values = np.ones(mask.count)
        values[int(np.argmin((dx - x1) ** 2 + dy ** 2))] = 2.0
        return ScalarField(mask, values)

    inside, (x1, x2) = argmax_in_segment(peaked_at(0.065), 1.0, 0.3, 0.5)
    assert x1 > mask.grid.h and x2 == 0.0
    assert not inside
    inside, (x1, _) = argmax_in_segment(peaked_at(-0.3), 1.0, 0.3, 0.5)
    assert inside and x1 < 0
    inside, _ = argmax_in_segment(peaked_at(-0.7), 1.0, 0.3, 0.5)
    assert not inside


def test_concentric_annulus_is_foliated():
    scenario = SimpleNamespace(domain="annulus", R=1.0, r=0.4, t=0.0)
    mask = make_annulus_mask(Grid2D.covering(1.0, 64), 1.0, 0.4, 0.0)
    trace = minimize_lambda(OptProblem.from_fields(chi(mask, 0.3), chi(mask, 0.2, 2.0)))
    report = symmetry_report(trace, scenario)
    assert report['foliation_axis'] is not None
    assert report['foliated_defect_phi'] <= 0.03
    assert report['foliated_defect_g'] <= 0.03
    assert report['foliated_defect_V'] <= 0.03


def test_maximizer_is_unique_across_seeds():
    mask = make_disk_mask(Grid2D.covering(1.0, 40), None, 1.0)
    traces = []
    for seed in range(3):
        problem = OptProblem.from_fields(chi(mask, 0.3), ScalarField.constant(mask, 0.0), direction=MAXIMIZE, tol_lambda=0.0,
                                         seed=seed, shuffle_start=True, solver=SolverOptions(seed=seed))
        traces.append(maximize_lambda(problem))
    assert len({t.g.digest() for t in traces}) == 1
    lambdas = [t.lam for t in traces]
    assert (max(lambdas) - min(lambdas)) <= 1e-9 * max(lambdas)


def main():
    tests = [
        ("singleton classes", test_singleton_classes_take_one_solve),
        ("problem validation", test_problem_validation),
        ("4-cell toy", test_four_cell_toy_matches_brute_force),
        ("exhaustive minimum", test_small_instances_reach_exhaustive_minimum),
        ("monotone trace", test_minimization_trace_is_monotone_and_feasible),
        ("fixed-point coupling", test_fixed_point_coupling),
        ("coupling violations", test_monotone_coupling_detects_violations),
        ("disk minimizer", test_disk_minimizer_is_centered_ball),
        ("non-concentric argmax", test_nonconcentric_argmax_on_segment),
        ("segment excludes positive axis", test_segment_excludes_positive_axis),
        ("concentric foliation", test_concentric_annulus_is_foliated),
        ("maximizer uniqueness", test_maximizer_is_unique_across_seeds),
    ]
    return run_tests("Optimizer", tests)


if __name__ == "__main__":
    raise SystemExit(main())
