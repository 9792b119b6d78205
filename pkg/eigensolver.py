"""
첫 번째 고유쌍 (Λ(g,V), φ) 계산 모듈

A = −Δ_h + diag(V), B = diag(g) 에 대해 A φ = Λ B φ 의 주 고유값을 구한다.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import cg

from errors import (
    NoPositiveDirectionError,
    NonCoerciveError,
    NonConvergenceError,
    NonPositiveDenominatorError,
    NonPrincipalError,
    SolverError,
)
from geometry import DomainMask
from polarization import dirichlet_energy
from rearrangement import ScalarField, require_same_mask


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_outer: int = 500
    max_inner: int = 5000
    seed: int = 0


@dataclass
class EigenResult:
    lam: float
    phi: ScalarField
    residual: float
    outer_iters: int = 0
    inner_cg_iters: int = 0
    method: str = "power"


@dataclass
class CoercivityReport:
    lambda_min_A: float
    lambda_min_laplacian: float
    delta0: float


@dataclass
class SimplicityReport:
    passed: bool
    lambdas: List[float] = field(default_factory=list)
    min_abs_cos: float = 1.0
    spread: float = 0.0


class SparseOperator:
    """5점 라플라시안 (1/h² 스케일) + diag(V), 내부 셀 선형 인덱스 순서"""

    def __init__(self, mask: DomainMask, laplacian: sparse.csr_matrix, potential: ScalarField):
        self.mask = mask
        self.laplacian = laplacian
        self.potential = potential
        self.matrix = (laplacian + sparse.diags(potential.values)).tocsr()

    @property
    def size(self) -> int:
        return self.mask.count

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _laplacian(mask: DomainMask) -> sparse.csr_matrix:
    grid = mask.grid
    n = mask.count
    idx = mask.interior_indices
    position = np.full(grid.size, -1, dtype=np.int64)
    position[idx] = np.arange(n)
    rows, cols = [], []
    for step in (1, -1, grid.nx, -grid.nx):
        neighbor = position[idx + step]
        inside = neighbor >= 0
        rows.append(np.arange(n)[inside])
        cols.append(neighbor[inside])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    scale = 1.0 / (grid.h * grid.h)
    off_diagonal = sparse.csr_matrix((np.full(rows.size, -scale), (rows, cols)), shape=(n, n))
    return (sparse.diags(np.full(n, 4.0 * scale)) + off_diagonal).tocsr()


def assemble(mask: DomainMask, V: ScalarField, g: ScalarField):
    """
    이산 연산자 조립

    Args:
        mask: 도메인 마스크
        V: 포텐셜
        g: 가중치

    Returns:
        (SparseOperator, B 의 대각 성분)
    """
    require_same_mask(mask, V.mask)
    require_same_mask(mask, g.mask)
    return SparseOperator(mask, _laplacian(mask), V), np.array(g.values)


def _power_iteration(matrix, weights: np.ndarray, x0: np.ndarray, tol: float, max_outer: int,
                     max_inner: int, shift: float = 0.0, verbose: bool = False):
    """
    matrix⁻¹·diag(weights) (+ shift·I) 의 거듭제곱 반복, 내부 풀이는 대각 전처리 CG

    Returns:
        (Rayleigh 몫, 단위 벡터, 상대 잔차, 외부 반복 수, CG 반복 수)
    """
    precond = sparse.diags(1.0 / matrix.diagonal())
    x = x0 / np.linalg.norm(x0)
    inner_iters = 0
    residual = 1.0
    lam = None
    seen_positive = False

    def count(_):
        nonlocal inner_iters
        inner_iters += 1

    for outer in range(1, max_outer + 1):
        rhs = weights * x
        guess = x / lam if lam else None
        z, info = cg(matrix, rhs, x0=guess, rtol=max(1e-12, 0.01 * residual), atol=0.0,
                     maxiter=max_inner, M=precond, callback=count)
        if info < 0:
            raise SolverError(f"CG 내부 풀이 실패 (info={info})")
        z = z + shift * x
        norm = np.linalg.norm(z)
        if norm == 0:
            raise NoPositiveDirectionError("반복 벡터가 0 이 되었습니다 (g⁺ ≡ 0?)")
        x = z / norm
        Ax = matrix @ x
        denominator = float(x @ (weights * x))
        if denominator <= 0:
            continue
        seen_positive = True
        lam = float(x @ Ax) / denominator
        residual = float(np.linalg.norm(Ax - lam * weights * x) / np.linalg.norm(Ax))
        if verbose:
            print(f"   ↻ 반복 {outer}: λ={lam:.12g}, 잔차={residual:.2e}")
        if residual <= tol:
            return lam, x, residual, outer, inner_iters

    if not seen_positive:
        raise NoPositiveDirectionError("모든 반복에서 φᵀBφ ≤ 0 입니다")
    raise NonConvergenceError(f"{max_outer} 회 반복 안에 수렴하지 않았습니다 (잔차 {residual:.2e})")


def _smallest_eigenvalue(matrix, seed: int, tol: float = 1e-9, max_outer: int = 2000, max_inner: int = 5000) -> float:
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.5, 1.5, matrix.shape[0])
    lam, *_ = _power_iteration(matrix, np.ones(matrix.shape[0]), x0, tol, max_outer, max_inner)
    return lam


def coercivity_check(op: SparseOperator, tol: float = 1e-8, seed: int = 0) -> CoercivityReport:
    """
    λ_min(A) > 0 확인 (쉬프트 0 역반복)

    V 가 음수를 가지면 A + s·I (s = max V⁻) 로 옮겨 CG 가 양정치 행렬만 보도록 한다.
    """
    lam_lap = _smallest_eigenvalue(op.laplacian, seed)
    v = op.potential.values
    v_min = float(v.min())
    if not np.any(v):
        lam_a = lam_lap
    else:
        shift = max(0.0, -v_min)
        shifted = (op.matrix + shift * sparse.identity(op.size, format="csr")).tocsr()
        lam_a = _smallest_eigenvalue(shifted, seed) - shift
    delta0 = lam_a / lam_lap
    if v_min >= 0:
        # V ≥ 0 이면 A ⪰ −Δ_h
        delta0 = max(delta0, 1.0)
    if lam_a <= tol * lam_lap:
        raise NonCoerciveError(
            f"연산자가 강압적이지 않습니다: λ_min(A)={lam_a:.6g}, λ_min(−Δ_h)={lam_lap:.6g}")
    return CoercivityReport(lam_a, lam_lap, delta0)


def rayleigh(op: SparseOperator, g: ScalarField, phi: ScalarField) -> float:
    """(φᵀAφ)/(φᵀBφ), 분자는 링크 에너지로 계산"""
    require_same_mask(op.mask, phi.mask)
    require_same_mask(op.mask, g.mask)
    denominator = float(np.dot(g.values, phi.values * phi.values))
    if denominator <= 0:
        raise NonPositiveDenominatorError(f"φᵀBφ = {denominator:g} ≤ 0")
    h = op.mask.grid.h
    numerator = dirichlet_energy(phi) / (h * h) + float(np.dot(op.potential.values, phi.values * phi.values))
    return numerator / denominator


def positivity_check(phi: ScalarField) -> bool:
    return bool(phi.values.min() > 0)


def _finish(op: SparseOperator, g: ScalarField, vector: np.ndarray, method: str,
            outer: int = 0, inner: int = 0) -> EigenResult:
    vector = vector / np.linalg.norm(vector)
    if vector.sum() < 0:
        vector = -vector
    phi = ScalarField(op.mask, vector)
    if not positivity_check(phi):
        raise NonPrincipalError(f"고유벡터가 양수가 아닙니다 (min φ = {vector.min():.3e})")
    lam = rayleigh(op, g, phi)
    Ax = op.apply(vector)
    residual = float(np.linalg.norm(Ax - lam * g.values * vector) / np.linalg.norm(Ax))
    return EigenResult(lam, phi, residual, outer, inner, method)


def solve_first(op: SparseOperator, g: ScalarField, options: Optional[SolverOptions] = None,
                coercivity: Optional[CoercivityReport] = None, initial: Optional[ScalarField] = None,
                verbose: bool = False) -> EigenResult:
    """
    A⁻¹B 의 거듭제곱 반복으로 가장 큰 양의 μ 를 구하고 Λ = 1/μ

    Args:
        op: 조립된 연산자
        g: 가중치 (g⁺ ≢ 0)
        options: 허용오차, 반복 한도, 시드
        coercivity: 미리 계산한 강압성 보고서 (V 에 음수가 있으면 필요)
        initial: 시작 벡터 (없으면 [0.5, 1.5] 균등 난수)

    Returns:
        EigenResult (φ > 0, ‖φ‖₂ = 1)
    """
    options = options or SolverOptions()
    require_same_mask(op.mask, g.mask)
    if g.values.max() <= 0:
        raise NoPositiveDirectionError("g⁺ ≡ 0 이면 양의 방향이 없습니다")
    if coercivity is None and op.potential.values.min() < 0:
        coercivity = coercivity_check(op, seed=options.seed)

    shift = 0.0
    g_minus = float(max(0.0, -g.values.min()))
    if g_minus > 0:
        # 음의 μ 가 지배하지 않도록 μ_min 하한만큼 이동
        coercivity = coercivity or coercivity_check(op, seed=options.seed)
        shift = g_minus / coercivity.lambda_min_A

    if initial is not None:
        require_same_mask(op.mask, initial.mask)
        x0 = np.abs(initial.values) + 1e-300
    else:
        x0 = np.random.default_rng(options.seed).uniform(0.5, 1.5, op.size)

    _, vector, _, outer, inner = _power_iteration(
        op.matrix, g.values, x0, options.tol, options.max_outer, options.max_inner, shift, verbose)
    return _finish(op, g, vector, "power", outer, inner)


def solve_dense(op: SparseOperator, g: ScalarField) -> EigenResult:
    """밀집 전체 스펙트럼 풀이 (작은 마스크용 오라클): B z = μ A z"""
    require_same_mask(op.mask, g.mask)
    try:
        mu, vectors = scipy.linalg.eigh(np.diag(g.values), op.dense())
    except np.linalg.LinAlgError as e:
        raise NonCoerciveError(f"A 가 양정치가 아닙니다: {e}")
    if mu[-1] <= 0:
        raise NoPositiveDirectionError("양의 고유값 μ 가 없습니다")
    return _finish(op, g, vectors[:, -1], "dense")


def simplicity_check(op: SparseOperator, g: ScalarField, trials: int = 5,
                     options: Optional[SolverOptions] = None) -> SimplicityReport:
    """서로 다른 난수 시작점에서 얻은 고유벡터들이 모두 평행한지"""
    options = options or SolverOptions()
    results = []
    for k in range(trials):
        trial = SolverOptions(options.tol, options.max_outer, options.max_inner, options.seed + k)
        results.append(solve_first(op, g, trial))
    lambdas = [r.lam for r in results]
    min_cos = 1.0
    for a in range(len(results)):
        for b in range(a + 1, len(results)):
            cosine = abs(float(np.dot(results[a].phi.values, results[b].phi.values)))
            min_cos = min(min_cos, cosine)
    spread = (max(lambdas) - min(lambdas)) if lambdas else 0.0
    passed = min_cos >= 1 - 1e-8 and spread <= 1e-8 * max(lambdas, default=0.0)
    return SimplicityReport(passed, lambdas, min_cos, spread)


class FirstEigenSolver:
    """마스크와 (g, V) 를 받아 첫 고유쌍을 구하는 진입점"""

    def __init__(self, options: Optional[SolverOptions] = None, verbose: bool = False):
        self.options = options or SolverOptions()
        self.verbose = verbose

    def solve(self, g: ScalarField, V: ScalarField, method: str = "power",
              initial: Optional[ScalarField] = None) -> Union[EigenResult, Dict[str, object]]:
        """
        Args:
            g: 가중치
            V: 포텐셜
            method: 'power', 'dense', 'both'
            initial: 거듭제곱 반복 시작 벡터 (warm start)

        Returns:
            EigenResult, 'both' 이면 두 결과와 상대 차이를 담은 딕셔너리
        """
        op, _ = assemble(g.mask, V, g)
        if method == "power":
            return solve_first(op, g, self.options, initial=initial, verbose=self.verbose)
        elif method == "dense":
            return solve_dense(op, g)
        elif method == "both":
            power = solve_first(op, g, self.options, initial=initial, verbose=self.verbose)
            dense = solve_dense(op, g)
            return {
                'power': power,
                'dense': dense,
                'lambda_gap': abs(power.lam - dense.lam) / dense.lam,
                'phi_gap': float(np.max(np.abs(power.phi.values - dense.phi.values))),
            }
        else:
            raise ValueError(f"지원하지 않는 방법: {method}")
