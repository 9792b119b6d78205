"""
E(g₀) × E(V₀) 위에서 Λ(g,V) 최소화/최대화 (교대 고유값 풀이 + 극값 재배열)
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from eigensolver import FirstEigenSolver, SolverOptions
from errors import FieldError, InvalidValueError, NegativeValueError, NoPositiveDirectionError
from geometry import DomainMask
from polarization import dirichlet_energy
from rearrangement import (
    RearrangementClass,
    ScalarField,
    class_of,
    extremal_max,
    extremal_min,
    require_same_mask,
)
from symmetrization import (
    find_foliation_axis,
    foliated_family,
    is_radial,
    schwarz_family,
    schwarz_symmetrize,
    steiner_family,
    symmetry_defect,
)

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

# 풀이 오차보다 큰 자리에서 끊어 대칭 셀들이 정확한 동률이 되게 한다
WEIGHT_DECIMALS = 6
MONOTONE_SLACK = 1e-10


@dataclass
class OptProblem:
    mask: DomainMask
    g_class: RearrangementClass
    V_class: RearrangementClass
    direction: str = MINIMIZE
    tol_lambda: Optional[float] = None   # None 이면 1e-10·Λ₀
    max_iters: int = 200
    seed: int = 0
    shuffle_start: bool = False
    g_start: Optional[ScalarField] = None
    V_start: Optional[ScalarField] = None
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        require_same_mask(self.mask, self.g_class.mask)
        require_same_mask(self.mask, self.V_class.mask)
        if self.direction not in (MINIMIZE, MAXIMIZE):
            raise InvalidValueError(f"direction 은 minimize 또는 maximize 여야 합니다: {self.direction}")
        if not self.g_class.sorted_values[0] > 0:
            raise NoPositiveDirectionError("g₀ 에 양수 값이 하나도 없습니다 (g₀⁺ ≡ 0)")
        if self.V_class.sorted_values[-1] < 0:
            raise NegativeValueError("V₀ 는 음이 아니어야 합니다")
        if self.direction == MAXIMIZE and self.g_class.sorted_values[-1] < 0:
            raise NegativeValueError("최대화는 g₀ ≥ 0 에서만 정의합니다")
        if self.max_iters < 1:
            raise InvalidValueError(f"max_iters 는 1 이상이어야 합니다: {self.max_iters}")
        for start, cls in ((self.g_start, self.g_class), (self.V_start, self.V_class)):
            if start is not None and not cls.contains(start):
                raise FieldError("시작 필드가 재배열 클래스에 속하지 않습니다")

    @classmethod
    def from_fields(cls, g0: ScalarField, V0: ScalarField, **kwargs) -> "OptProblem":
        """g₀, V₀ 에서 시작하는 문제"""
        require_same_mask(g0.mask, V0.mask)
        return cls(g0.mask, class_of(g0), class_of(V0), g_start=g0, V_start=V0, **kwargs)

    def starting_members(self) -> Tuple[ScalarField, ScalarField]:
        rng = np.random.default_rng(self.seed)
        if self.shuffle_start:
            return self.g_class.random_member(rng), self.V_class.random_member(rng)
        g = self.g_start if self.g_start is not None else self.g_class.sorted_order_member()
        V = self.V_start if self.V_start is not None else self.V_class.sorted_order_member()
        return g, V


@dataclass
class IterationRecord:
    iteration: int
    lam: float
    g_hash: str
    V_hash: str
    residual: float


@dataclass
class OptTrace:
    direction: str
    records: List[IterationRecord]
    lam: float
    g: ScalarField
    V: ScalarField
    phi: ScalarField
    status: str   # converged | cycled | max_iters

    @property
    def iterations(self) -> int:
        """고유값 풀이 횟수"""
        return len(self.records)

    @property
    def lambdas(self) -> List[float]:
        return [r.lam for r in self.records]


def rearrangement_weight(phi: ScalarField) -> ScalarField:
    """재배열 기준 프로파일 φ² / max φ², 소수 WEIGHT_DECIMALS 자리 반올림"""
    squared = phi.values * phi.values
    return phi.with_values(np.round(squared / squared.max(), WEIGHT_DECIMALS))


def _quotient(phi: ScalarField, g: ScalarField, V: ScalarField, energy: float) -> float:
    squared = phi.values * phi.values
    return (energy + float(np.dot(V.values, squared))) / float(np.dot(g.values, squared))


def _no_worse(phi, g, V, g_next, V_next) -> bool:
    """현재 φ 에서 새 배치의 Rayleigh 몫이 (MONOTONE_SLACK 이내로) 커지지 않는지"""
    h = phi.mask.grid.h
    energy = dirichlet_energy(phi) / (h * h)
    squared = phi.values * phi.values
    if float(np.dot(g.values, squared)) <= 0 or float(np.dot(g_next.values, squared)) <= 0:
        return True
    return _quotient(phi, g_next, V_next, energy) <= _quotient(phi, g, V, energy) * (1 + MONOTONE_SLACK)


def _alternate(problem: OptProblem, verbose: bool = False) -> OptTrace:
    minimizing = problem.direction == MINIMIZE
    solver = FirstEigenSolver(problem.solver, verbose=False)
    g, V = problem.starting_members()

    result = solver.solve(g, V)
    lam, phi = result.lam, result.phi
    tol = problem.tol_lambda if problem.tol_lambda is not None else 1e-10 * abs(lam)
    records = [IterationRecord(0, lam, g.digest(), V.digest(), result.residual)]
    seen = {(records[0].g_hash, records[0].V_hash)}
    best = (lam, g, V, phi)
    status = "max_iters"
    if verbose:
        print(f"🔍 {problem.direction}: Λ₀ = {lam:.10g}")

    for k in range(1, problem.max_iters):
        weight = rearrangement_weight(phi)
        if minimizing:
            g_next, V_next = extremal_max(problem.g_class, weight), extremal_min(problem.V_class, weight)
        else:
            g_next, V_next = extremal_min(problem.g_class, weight), extremal_max(problem.V_class, weight)

        if (g_next == g and V_next == V) or (minimizing and not _no_worse(phi, g, V, g_next, V_next)):
            status = "converged"
            break
        key = (g_next.digest(), V_next.digest())
        if key in seen:
            status = "cycled"
            break
        seen.add(key)

        result = solver.solve(g_next, V_next, initial=phi)
        records.append(IterationRecord(k, result.lam, key[0], key[1], result.residual))
        change = abs(result.lam - lam)
        g, V, lam, phi = g_next, V_next, result.lam, result.phi
        if (lam < best[0]) if minimizing else (lam > best[0]):
            best = (lam, g, V, phi)
        if verbose:
            print(f"   ↻ 반복 {k}: Λ = {lam:.10g} (ΔΛ = {change:.2e})")
        if change <= tol:
            status = "converged"
            break

    if verbose:
        mark = "✅" if status == "converged" else "⚠️"
        print(f"{mark} {problem.direction} 종료: {status}, Λ* = {best[0]:.10g}, 풀이 {len(records)} 회")
    lam, g, V, phi = best
    return OptTrace(problem.direction, records, lam, g, V, phi, status)


def minimize_lambda(problem: OptProblem, verbose: bool = False) -> OptTrace:
    """
    Λ 최소화: g 는 φ² 가 큰 곳에 큰 값, V 는 φ² 가 큰 곳에 작은 값

    Args:
        problem: 최소화 문제
        verbose: 반복마다 진행 상황 출력

    Returns:
        OptTrace (Λ 궤적은 풀이 허용오차 안에서 비증가)
    """
    if problem.direction != MINIMIZE:
        raise InvalidValueError("minimize_lambda 에 maximize 문제가 주어졌습니다")
    return _alternate(problem, verbose)


def maximize_lambda(problem: OptProblem, verbose: bool = False) -> OptTrace:
    """Λ 최대화: 선택을 뒤집은 교대 반복, 지금까지의 최댓값을 유지한다"""
    if problem.direction != MAXIMIZE:
        raise InvalidValueError("maximize_lambda 에 minimize 문제가 주어졌습니다")
    return _alternate(problem, verbose)


def optimize(problem: OptProblem, verbose: bool = False) -> OptTrace:
    if problem.direction == MINIMIZE:
        return minimize_lambda(problem, verbose)
    return maximize_lambda(problem, verbose)


def brute_force_optimum(problem: OptProblem) -> Tuple[float, ScalarField, ScalarField]:
    """모든 (g, V) 멤버 쌍을 밀집 풀이로 평가 (작은 인스턴스 오라클)"""
    solver = FirstEigenSolver(problem.solver)
    minimizing = problem.direction == MINIMIZE
    best = None
    for g in problem.g_class.members():
        for V in problem.V_class.members():
            lam = solver.solve(g, V, method="dense").lam
            if best is None or (lam < best[0] if minimizing else lam > best[0]):
                best = (lam, g, V)
    return best


def check_monotone_coupling(phi: ScalarField, g: ScalarField, decreasing: bool = False,
                            phi_tol: float = 0.0) -> bool:
    """
    φ 오름차순으로 셀을 나열했을 때 g 가 비감소인지 (decreasing=True 면 비증가)

    φ 값 차이가 phi_tol 이하인 셀들은 한 묶음이며 묶음 안의 순서는 자유다.
    """
    require_same_mask(phi.mask, g.mask)
    order = np.argsort(phi.values, kind="stable")
    sorted_phi = phi.values[order]
    values = g.values[order]
    if decreasing:
        values = -values
    groups = np.concatenate(([0], np.cumsum(np.diff(sorted_phi) > phi_tol)))
    count = int(groups[-1]) + 1
    lo = np.full(count, np.inf)
    hi = np.full(count, -np.inf)
    np.minimum.at(lo, groups, values)
    np.maximum.at(hi, groups, values)
    return bool(np.all(hi[:-1] <= lo[1:]))


# --- 대칭 보고서 ---

def _safe_defect(f: ScalarField, family, dual: bool = False) -> float:
    try:
        return symmetry_defect(f, family, metric="rel_l2", dual=dual)
    except FieldError:
        return float("inf")


def ball_mismatch(g: ScalarField) -> float:
    """|{g* ≠ Schwarz(g*)}| / |{g* > 0}|"""
    support = int(np.count_nonzero(g.values > 0))
    if support == 0:
        return 0.0
    symmetric = schwarz_symmetrize(g)
    return int(np.count_nonzero(symmetric.values != g.values)) / support


def argmax_in_segment(phi: ScalarField, R: float, r: float, t: float) -> Tuple[bool, Tuple[float, float]]:
    """
    φ 최대 셀이 L_Ω = {x2 = 0, −(R+r−t)/2 ≤ x1 < min(t − r, 0)} 에서 한 셀 이내인지

    Returns:
        (포함 여부, 최대 셀 중심의 격자 중앙 기준 좌표)
    """
    dx, dy = phi.mask.offsets()
    k = int(np.argmax(phi.values))
    x1, x2 = float(dx[k]), float(dy[k])
    h = phi.mask.grid.h
    lower = -(R + r - t) / 2
    upper = min(t - r, 0.0)
    inside = abs(x2) <= h * (1 + 1e-9) and lower - h <= x1 < upper + h
    return inside, (x1, x2)


def symmetry_report(trace: OptTrace, scenario) -> Dict[str, object]:
    """
    최적점에서 대칭 성질 평가 (보고 전용, 예외를 던지지 않는다)

    Args:
        trace: 최적화 결과
        scenario: domain, R, r, t 속성을 가진 시나리오
    """
    phi, g, V = trace.phi, trace.g, trace.V
    grid = phi.mask.grid
    domain = getattr(scenario, "domain", "")
    report: Dict[str, object] = {
        'direction': trace.direction,
        'status': trace.status,
        'iterations': trace.iterations,
        'lambda': trace.lam,
        'g_hash': g.digest(),
        'V_hash': V.digest(),
    }

    if domain == "disk":
        family = schwarz_family(grid)
        report['schwarz_defect_phi'] = _safe_defect(phi, family)
        report['schwarz_defect_g'] = _safe_defect(g, family)
        report['schwarz_defect_V'] = _safe_defect(V, family, dual=True)
        if g.is_nonnegative():
            report['ball_mismatch'] = ball_mismatch(g)

    if domain in ("steiner", "dumbbell", "disk", "box"):
        family = steiner_family(grid)
        report['steiner_defect_phi'] = _safe_defect(phi, family)
        report['steiner_defect_g'] = _safe_defect(g, family)
        report['steiner_defect_V'] = _safe_defect(V, family, dual=True)

    if domain == "annulus":
        # 임계값 없이 결함이 가장 작은 축을 기록하고 판정은 기대값 검사에 맡긴다
        axis = find_foliation_axis(phi, tol=math.inf, metric="rel_l2")
        report['foliation_axis'] = list(axis) if axis else None
        report['foliated_defect_phi'] = math.inf
        if axis is not None:
            family = foliated_family(grid, axis)
            report['foliated_defect_phi'] = _safe_defect(phi, family)
            report['foliated_defect_g'] = _safe_defect(g, family)
            # V 는 반대 축 기준: 같은 족에서 쌍대 편광으로 잰다
            report['foliated_defect_V'] = _safe_defect(V, family, dual=True)
        inside, location = argmax_in_segment(phi, scenario.R, scenario.r, scenario.t or 0.0)
        report['argmax_in_L_Omega'] = inside
        report['argmax_location'] = list(location)
        report['g_radial'] = is_radial(g, tol=1e-12 * float(np.abs(g.values).max()))

    return report
