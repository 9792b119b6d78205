#!/usr/bin/env python3
"""
Randomized property batteries for polarization, rearrangement, symmetrization,
the eigensolver and the optimizer
"""
import json
import warnings
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from eigensolver import FirstEigenSolver, SolverOptions
from errors import LabError, SignedFieldWarning
from geometry import DIRECTIONS, DomainMask, Grid2D, make_disk_mask, make_steiner_mask
from optimizer import OptProblem, brute_force_optimum, minimize_lambda
from polarization import dirichlet_energy, dual_polarize, hardy_littlewood_gap, polarize, reverse_hl_gap
from rearrangement import (
    RearrangementClass,
    ScalarField,
    brute_force_extremal,
    class_of,
    extremal_max,
    extremal_min,
    is_rearrangement,
    pairing,
)
from symmetrization import (
    foliated_family,
    foliated_schwarz_symmetrize,
    is_foliated_schwarz_symmetric,
    is_schwarz_symmetric,
    is_steiner_symmetric,
    schwarz_family,
    schwarz_symmetrize,
    steiner_symmetrize,
)

DEFAULT_COUNTS = {
    'polarization': 1000,
    'hardy_littlewood': 1000,
    'reverse_hardy_littlewood': 1000,
    'dirichlet_energy': 500,
    'extremal_oracle': 200,
    'symmetrizers': 100,
    'eigen_oracle': 50,
    'minimization': 50,
}

PolarizeFn = Callable[[ScalarField, object], ScalarField]


def random_disk_mask(rng: np.random.Generator, max_n: int = 12) -> DomainMask:
    """격자 중앙에 놓인 작은 원판 (테두리에 닿지 않음)"""
    n = int(rng.integers(5, max_n + 1))
    R = float(rng.uniform(1.2, max(1.3, (n - 1) / 2 - 1)))
    return make_disk_mask(Grid2D.centered(n, 1.0), None, R)


def random_field(rng: np.random.Generator, mask: DomainMask, signed: bool = False) -> ScalarField:
    """동률이 섞이도록 절반은 정수값, 절반은 연속값"""
    if rng.random() < 0.5:
        values = rng.integers(0, 4, mask.count).astype(float)
    else:
        values = rng.uniform(0.0, 1.0, mask.count)
    if signed:
        values = values - float(rng.uniform(0.0, values.max() + 1e-3))
    return ScalarField(mask, values)


def random_small_mask(rng: np.random.Generator, max_cells: int) -> DomainMask:
    """5×5 격자 내부 3×3 에서 고른 임의 부분집합"""
    inside = np.zeros((5, 5), dtype=bool)
    cells = rng.permutation(9)[:int(rng.integers(1, max_cells + 1))]
    for k in cells:
        inside[1 + k // 3, 1 + k % 3] = True
    return DomainMask(Grid2D(5, 5, 1.0), inside)


class PropertySuite:
    """
    무작위 성질 검사 묶음

    Args:
        seed: 난수 시드
        counts: 모든 묶음의 시행 수 (None 이면 묶음별 기본값)
        polarize_fn: 검사에 쓸 편광 함수 (결함 주입용)
    """

    def __init__(self, seed: int = 0, counts: Optional[int] = None,
                 polarize_fn: PolarizeFn = polarize, progress: bool = True):
        self.seed = seed
        self.counts = counts
        self.polarize_fn = polarize_fn
        self.progress = progress
        self.results = {
            'passed': [],
            'failed': [],
            'warnings': [],
            'batteries': {},
            'score': 0,
        }

    def _count(self, battery: str) -> int:
        return DEFAULT_COUNTS[battery] if self.counts is None else self.counts

    def _trials(self, battery: str):
        n = self._count(battery)
        return tqdm(range(n), desc=battery, leave=False, disable=not self.progress or n == 0)

    def run_all(self) -> Dict[str, object]:
        print("🔍 Property suite")
        print("=" * 50)
        batteries = [
            ('polarization', self._polarization),
            ('hardy_littlewood', self._hardy_littlewood),
            ('reverse_hardy_littlewood', self._reverse_hardy_littlewood),
            ('dirichlet_energy', self._dirichlet_energy),
            ('extremal_oracle', self._extremal_oracle),
            ('symmetrizers', self._symmetrizers),
            ('eigen_oracle', self._eigen_oracle),
            ('minimization', self._minimization),
        ]
        for offset, (name, battery) in enumerate(batteries):
            rng = np.random.default_rng([self.seed, offset])
            failures: List[str] = []
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SignedFieldWarning)
                try:
                    battery(rng, failures)
                except LabError as e:
                    failures.append(f"예외: {e}")
            trials = self._count(name)
            self.results['batteries'][name] = {'trials': trials, 'failures': len(failures)}
            if failures:
                self._fail(f"{name}: {len(failures)}/{trials} 실패 (첫 실패: {failures[0]})")
            elif trials == 0:
                self._warn(f"{name}: 시행 0 회")
            else:
                self._pass(f"{name}: {trials} 회 통과")

        self._calculate_score()
        self._print_results()
        return self.results

    # --- 묶음 ---

    def _polarization(self, rng, failures):
        for trial in self._trials('polarization'):
            mask = random_disk_mask(rng)
            H = schwarz_family(mask.grid)[int(rng.integers(len(schwarz_family(mask.grid))))]
            f = random_field(rng, mask)
            f_h = self.polarize_fn(f, H)
            if not is_rearrangement(f, f_h):
                failures.append(f"#{trial} 등측도성 위반")
            elif self.polarize_fn(f_h, H) != f_h:
                failures.append(f"#{trial} 멱등성 위반")

    def _hardy_littlewood(self, rng, failures):
        for trial in self._trials('hardy_littlewood'):
            mask = random_disk_mask(rng)
            family = schwarz_family(mask.grid)
            H = family[int(rng.integers(len(family)))]
            v = random_field(rng, mask, signed=bool(rng.random() < 0.5))
            w = random_field(rng, mask)
            gap = hardy_littlewood_gap(v, w, H)
            direct = pairing(self.polarize_fn(v, H), self.polarize_fn(w, H)) - pairing(v, w)
            scale = 1e-9 * max(1.0, float(np.abs(v.values).sum() * np.abs(w.values).max()))
            if gap < 0 or direct < -scale or abs(direct - gap) > scale:
                failures.append(f"#{trial} gap={gap:.3g}, direct={direct:.3g}")

    def _reverse_hardy_littlewood(self, rng, failures):
        for trial in self._trials('reverse_hardy_littlewood'):
            mask = random_disk_mask(rng)
            family = schwarz_family(mask.grid)
            H = family[int(rng.integers(len(family)))]
            v = random_field(rng, mask, signed=bool(rng.random() < 0.5))
            w = random_field(rng, mask)
            gap = reverse_hl_gap(v, w, H)
            direct = pairing(v, w) - pairing(dual_polarize(v, H), self.polarize_fn(w, H))
            scale = 1e-9 * max(1.0, float(np.abs(v.values).sum() * np.abs(w.values).max()))
            if gap < 0 or direct < -scale or abs(direct - gap) > scale:
                failures.append(f"#{trial} gap={gap:.3g}, direct={direct:.3g}")

    def _dirichlet_energy(self, rng, failures):
        for trial in self._trials('dirichlet_energy'):
            mask = random_disk_mask(rng)
            family = schwarz_family(mask.grid)
            H = family[int(rng.integers(len(family)))]
            f = random_field(rng, mask)
            before = dirichlet_energy(f)
            after = dirichlet_energy(self.polarize_fn(f, H))
            if after > before + 1e-12 * max(1.0, before):
                failures.append(f"#{trial} E(f_H)={after:.6g} > E(f)={before:.6g}")

    def _extremal_oracle(self, rng, failures):
        for trial in self._trials('extremal_oracle'):
            mask = random_small_mask(rng, 8)
            cls = class_of(ScalarField(mask, rng.integers(0, 3, mask.count).astype(float)))
            h = ScalarField(mask, rng.uniform(-1.0, 1.0, mask.count))
            best_max, _ = brute_force_extremal(cls, h, maximize=True)
            best_min, _ = brute_force_extremal(cls, h, maximize=False)
            if pairing(extremal_max(cls, h), h) != best_max:
                failures.append(f"#{trial} extremal_max ≠ 전수 최댓값")
            if pairing(extremal_min(cls, h), h) != best_min:
                failures.append(f"#{trial} extremal_min ≠ 전수 최솟값")

    def _symmetrizers(self, rng, failures):
        for trial in self._trials('symmetrizers'):
            disk = random_disk_mask(rng)
            f = random_field(rng, disk)
            s = schwarz_symmetrize(f)
            if not (is_rearrangement(f, s) and schwarz_symmetrize(s) == s and is_schwarz_symmetric(s)):
                failures.append(f"#{trial} Schwarz")

            axes = [d for d in DIRECTIONS if foliated_family(disk.grid, d)]
            beta = axes[int(rng.integers(len(axes)))]
            s = foliated_schwarz_symmetrize(f, beta)
            if not (is_rearrangement(f, s) and foliated_schwarz_symmetrize(s, beta) == s
                    and is_foliated_schwarz_symmetric(s, beta)):
                failures.append(f"#{trial} foliated β={beta}")

            n = int(rng.integers(7, 13))
            limit = (n - 1) / 2 - 1
            ellipse = make_steiner_mask(Grid2D.centered(n, 1.0), "ellipse",
                                        a=float(rng.uniform(1.5, limit)), b=float(rng.uniform(1.5, limit)))
            f = random_field(rng, ellipse)
            s = steiner_symmetrize(f)
            if not (is_rearrangement(f, s) and steiner_symmetrize(s) == s and is_steiner_symmetric(s)):
                failures.append(f"#{trial} Steiner")

    def _eigen_oracle(self, rng, failures):
        solver = FirstEigenSolver(SolverOptions(tol=1e-10, seed=self.seed))
        for trial in self._trials('eigen_oracle'):
            mask = random_disk_mask(rng, max_n=11)
            g = ScalarField(mask, rng.uniform(0.1, 2.0, mask.count))
            V = ScalarField(mask, rng.uniform(0.0, 3.0, mask.count))
            both = solver.solve(g, V, method="both")
            if both['lambda_gap'] > 1e-10 or both['phi_gap'] > 1e-8:
                failures.append(f"#{trial} Λ 차이 {both['lambda_gap']:.2e}, φ 차이 {both['phi_gap']:.2e}")

    def _minimization(self, rng, failures):
        grid = Grid2D(5, 4, 1.0)
        inside = np.zeros((4, 5), dtype=bool)
        inside[1:3, 1:4] = True
        mask = DomainMask(grid, inside)
        for trial in self._trials('minimization'):
            g0 = ScalarField(mask, rng.permutation([2.0, 1.0, 0.0, 0.0, 0.0, 0.0]))
            V0 = ScalarField.constant(mask, float(rng.uniform(0.0, 2.0)))
            problem = OptProblem.from_fields(g0, V0, seed=trial, solver=SolverOptions(seed=trial))
            trace = minimize_lambda(problem)
            lambdas = trace.lambdas
            if any(b > a * (1 + 1e-9) for a, b in zip(lambdas, lambdas[1:])):
                failures.append(f"#{trial} Λ 궤적이 증가했습니다")
            best, _, _ = brute_force_optimum(problem)
            if abs(trace.lam - best) > 1e-9 * best:
                failures.append(f"#{trial} Λ*={trace.lam:.12g}, 전수 최솟값={best:.12g}")

    # --- 기록 ---

    def _pass(self, message):
        self.results['passed'].append(message)
        print(f"  ✅ {message}")

    def _fail(self, message):
        self.results['failed'].append(message)
        print(f"  ❌ {message}")

    def _warn(self, message):
        self.results['warnings'].append(message)
        print(f"  ⚠️  {message}")

    def _calculate_score(self):
        passed = len(self.results['passed'])
        failed = len(self.results['failed'])
        warned = len(self.results['warnings'])
        total = passed + failed + warned
        if total > 0:
            self.results['score'] = round((passed + warned * 0.5) / total * 100, 1)

    def _print_results(self):
        print("\n" + "=" * 50)
        print("📊 PROPERTY SUITE RESULTS")
        print("=" * 50)
        print(f"{'battery':<28}{'trials':>8}{'failures':>10}")
        for name, row in self.results['batteries'].items():
            print(f"{name:<28}{row['trials']:>8}{row['failures']:>10}")
        print("-" * 50)
        print(f"✅ Passed:   {len(self.results['passed'])}")
        print(f"❌ Failed:   {len(self.results['failed'])}")
        print(f"⚠️  Warnings: {len(self.results['warnings'])}")
        print(f"📈 Score:    {self.results['score']}%")


def run_property_suite(seed: int = 0, counts: Optional[int] = None,
                       results_path: Optional[str] = "property_suite_results.json",
                       polarize_fn: PolarizeFn = polarize, progress: bool = True) -> int:
    """
    모든 묶음을 실행하고 결과 JSON 을 저장

    Returns:
        종료 코드 (실패가 하나라도 있으면 1)
    """
    suite = PropertySuite(seed, counts, polarize_fn, progress)
    results = suite.run_all()
    if results_path:
        with open(Path(results_path), 'w', encoding='utf-8') as handle:
            json.dump(results, handle, indent=2, ensure_ascii=False)
        print(f"\n💾 Results saved to: {results_path}")
    return 1 if results['failed'] else 0


if __name__ == "__main__":
    raise SystemExit(run_property_suite())
