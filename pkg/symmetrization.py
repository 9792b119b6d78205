"""
Schwarz, Steiner, foliated Schwarz 대칭화와 편광 기반 특성화 오라클
"""
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    DomainParameterError,
    FieldError,
    IncompatibleHalfSpaceError,
    NegativeValueError,
    NonRadialMaskError,
    NonSteinerMaskError,
)
from geometry import (
    DIRECTIONS,
    Direction,
    DomainMask,
    Grid2D,
    HalfSpace,
    Point,
    half_spaces_containing_middle,
    half_spaces_through_middle,
    is_radially_symmetric,
    is_steiner_mask,
    unit_vector,
)
from polarization import dual_polarize, polarize
from rearrangement import ScalarField


@dataclass(frozen=True)
class RadialBinning:
    """격자 중앙 기준 반지름 껍질. bins[k] 는 k 번째 껍질의 선형 셀 인덱스"""
    center: Point
    bin_width: float
    bins: Tuple[np.ndarray, ...]
    bin_ids: np.ndarray      # 내부 셀별 껍질 번호 (값 순서)
    radii: np.ndarray        # 내부 셀별 중심 거리


def radial_binning(mask: DomainMask, bin_width: Optional[float] = None) -> RadialBinning:
    """
    내부 셀을 폭 bin_width 의 껍질로 나눈다 (기본값 h)

    Args:
        mask: 도메인 마스크
        bin_width: 껍질 폭, h 이상
    """
    h = mask.grid.h
    width = h if bin_width is None else float(bin_width)
    if width < h:
        raise DomainParameterError(f"껍질 폭은 h={h} 이상이어야 합니다: {width}")
    dx, dy = mask.offsets()
    radii = np.sqrt(dx * dx + dy * dy)
    raw = np.floor(radii / width).astype(np.int64)
    _, bin_ids = np.unique(raw, return_inverse=True)
    bin_ids = bin_ids.ravel()
    bins = tuple(mask.interior_indices[bin_ids == k] for k in range(int(bin_ids.max()) + 1))
    return RadialBinning(mask.grid.middle, width, bins, bin_ids, radii)


def _require_nonnegative(f: ScalarField):
    if not f.is_nonnegative():
        raise NegativeValueError("대칭화는 음이 아닌 필드만 받습니다")


def _looks_like_disk(mask: DomainMask) -> bool:
    dx, dy = mask.grid.offsets()
    radii = np.sqrt(dx * dx + dy * dy)
    reach = radii.ravel()[mask.interior_indices].max()
    return bool(np.array_equal(radii <= reach, mask.inside))


def schwarz_symmetrize(f: ScalarField) -> ScalarField:
    """
    반지름 방향 감소 재배열 (중심은 격자 중앙)

    중심에서 가까운 셀부터 큰 값을 배정하며, 동률은 극각, 셀 인덱스 순이다.
    """
    _require_nonnegative(f)
    if not _looks_like_disk(f.mask):
        warnings.warn("Schwarz 대칭화: 마스크가 원판이 아닙니다", UserWarning, stacklevel=2)
    dx, dy = f.mask.offsets()
    radii = np.sqrt(dx * dx + dy * dy)
    angles = np.mod(np.arctan2(dy, dx), 2 * np.pi)
    order = np.lexsort((np.arange(radii.size), angles, radii))
    values = np.empty(radii.size)
    values[order] = np.sort(f.values)[::-1]
    return f.with_values(values)


def steiner_symmetrize(f: ScalarField) -> ScalarField:
    """
    열마다 값을 정렬해 중앙선에서 바깥으로 배치

    짝수 길이 열에서는 가운데 두 셀이 가장 큰 두 값을 받고, 각 쌍의 큰 값은 행 인덱스가 작은 쪽에 놓인다.
    """
    _require_nonnegative(f)
    mask = f.mask
    if not is_steiner_mask(mask):
        raise NonSteinerMaskError("마스크가 Steiner 대칭 (열 연속, 중앙선 대칭) 이 아닙니다")
    nx, ny = mask.grid.nx, mask.grid.ny
    rows = mask.interior_indices // nx
    cols = mask.interior_indices % nx
    distance = np.abs(2 * rows - (ny - 1))
    cell_order = np.lexsort((rows, distance, cols))
    value_order = np.lexsort((-f.values, cols))
    values = np.empty(f.values.size)
    values[cell_order] = f.values[value_order]
    return f.with_values(values)


def foliated_schwarz_symmetrize(f: ScalarField, beta: Sequence[float],
                                binning: Optional[RadialBinning] = None,
                                allow_nonradial: bool = False) -> ScalarField:
    """
    껍질마다 β 로부터의 극각이 작은 셀에 큰 값을 배정

    Args:
        f: 음이 아닌 필드
        beta: 축 방향 (정규화는 내부에서)
        binning: 미리 계산한 껍질 (없으면 폭 h 로 계산)
        allow_nonradial: 비동심 고리처럼 반지름 대칭이 아닌 마스크 허용 (Ω 셀만 재배열)
    """
    _require_nonnegative(f)
    mask = f.mask
    if not allow_nonradial and not is_radially_symmetric(mask):
        raise NonRadialMaskError("마스크가 격자 중앙에 대해 반지름 대칭이 아닙니다")
    binning = binning or radial_binning(mask)
    b = unit_vector(beta)
    dx, dy = mask.offsets()
    radii = binning.radii
    safe = np.where(radii > 0, radii, 1.0)
    cosines = np.where(radii > 0, (dx * b[0] + dy * b[1]) / safe, 1.0)
    index = np.arange(radii.size)
    cell_order = np.lexsort((index, -cosines, binning.bin_ids))
    value_order = np.lexsort((-f.values, binning.bin_ids))
    values = np.empty(radii.size)
    values[cell_order] = f.values[value_order]
    return f.with_values(values)


# --- 특성화 오라클 ---

def symmetry_defect(f: ScalarField, family: Sequence[HalfSpace], metric: str = "sup", dual: bool = False) -> float:
    """
    반공간 족 위의 최대 편광 결함 max_H ‖f_H − f‖

    Args:
        metric: 'sup' (절대 최대값) 또는 'rel_l2' (‖f_H − f‖₂ / ‖f‖₂)
        dual: True 면 f^H 와 비교 (V 처럼 φ 가 큰 곳에서 작아지는 필드)
    """
    if metric not in ("sup", "rel_l2"):
        raise ValueError(f"지원하지 않는 metric: {metric}")
    scale = float(np.linalg.norm(f.values))
    worst = 0.0
    for half_space in family:
        moved = (dual_polarize if dual else polarize)(f, half_space)
        diff = moved.values - f.values
        if metric == "sup":
            defect = float(np.max(np.abs(diff)))
        else:
            defect = float(np.linalg.norm(diff)) / scale if scale > 0 else 0.0
        worst = max(worst, defect)
    return worst


def schwarz_family(grid: Grid2D) -> List[HalfSpace]:
    return half_spaces_containing_middle(grid)


def steiner_family(grid: Grid2D) -> List[HalfSpace]:
    return half_spaces_containing_middle(grid, [(0, 1), (0, -1)])


def foliated_family(grid: Grid2D, beta: Sequence[float]) -> List[HalfSpace]:
    """0 ∈ ∂H 이고 β ∈ H 인 격자 호환 반공간 (법선 d 에 대해 d·β < 0)"""
    b = unit_vector(beta)
    return [H for H in half_spaces_through_middle(grid)
            if H.direction[0] * b[0] + H.direction[1] * b[1] < -1e-12]


def is_schwarz_symmetric(f: ScalarField, tol: float = 0.0, metric: str = "sup", dual: bool = False) -> bool:
    return symmetry_defect(f, schwarz_family(f.mask.grid), metric, dual) <= tol


def is_steiner_symmetric(f: ScalarField, tol: float = 0.0, metric: str = "sup", dual: bool = False) -> bool:
    if not is_steiner_mask(f.mask):
        raise NonSteinerMaskError("마스크가 Steiner 대칭이 아닙니다")
    return symmetry_defect(f, steiner_family(f.mask.grid), metric, dual) <= tol


def is_foliated_schwarz_symmetric(f: ScalarField, beta: Sequence[float], tol: float = 0.0,
                                  metric: str = "sup", dual: bool = False) -> bool:
    family = foliated_family(f.mask.grid, beta)
    if not family:
        raise IncompatibleHalfSpaceError(f"β={tuple(beta)} 에 대한 격자 호환 반공간이 없습니다")
    return symmetry_defect(f, family, metric, dual) <= tol


def find_foliation_axis(f: ScalarField, tol: float = 0.0, metric: str = "sup",
                        dual: bool = False) -> Optional[Direction]:
    """
    후보 방향 ±e1, ±e2, ±대각선 중 foliated 결함이 tol 이하인 축

    여럿이 통과하면 결함이 가장 작은 축, 같으면 DIRECTIONS 순서가 앞선 축.
    마스크가 편광에 닫혀 있지 않은 방향은 건너뛴다.
    """
    best, best_defect = None, math.inf
    for direction in DIRECTIONS:
        family = foliated_family(f.mask.grid, direction)
        if not family:
            continue
        try:
            defect = symmetry_defect(f, family, metric, dual)
        except FieldError:
            continue
        if defect <= tol and defect < best_defect:
            best, best_defect = direction, defect
    return best


def is_radial(f: ScalarField, tol: float = 0.0, binning: Optional[RadialBinning] = None) -> bool:
    """껍질마다 값이 (tol 이내로) 일정한지"""
    binning = binning or radial_binning(f.mask)
    lo = np.full(len(binning.bins), np.inf)
    hi = np.full(len(binning.bins), -np.inf)
    np.minimum.at(lo, binning.bin_ids, f.values)
    np.maximum.at(hi, binning.bin_ids, f.values)
    spread = hi - lo
    return bool(np.all(spread <= tol))
