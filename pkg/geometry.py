"""
격자, 도메인 마스크, 격자 호환 반공간과 반사 모듈
"""
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    DomainParameterError,
    EmptyMaskError,
    IncompatibleHalfSpaceError,
    MaskError,
    PolarizationOutOfGridError,
    ShapeOutsideGridError,
)

Point = Tuple[float, float]
Direction = Tuple[int, int]

E1: Direction = (1, 0)
E2: Direction = (0, 1)
DIAGONAL: Direction = (1, 1)
ANTI_DIAGONAL: Direction = (1, -1)

# 후보 순서가 find_foliation_axis 의 탐색 순서가 된다
DIRECTIONS: List[Direction] = [
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (-1, -1), (1, -1), (-1, 1),
]

_LEVEL_TOL = 1e-7


def unit_vector(direction: Sequence[float]) -> np.ndarray:
    v = np.asarray(direction, dtype=float)
    return v / math.sqrt(float(v @ v))


def _is_diagonal(direction: Direction) -> bool:
    return direction[0] != 0 and direction[1] != 0


@dataclass(frozen=True)
class CellIndex:
    i: int
    j: int


@dataclass(frozen=True)
class Grid2D:
    """균일 직교 격자. 셀 (i, j)의 중심은 origin + (i·h, j·h)"""
    nx: int
    ny: int
    h: float
    origin: Point = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if self.nx < 3 or self.ny < 3:
            raise DomainParameterError(f"격자는 최소 3×3 이어야 합니다: {self.nx}×{self.ny}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise DomainParameterError(f"격자 간격 h 는 양수여야 합니다: {self.h}")

    @classmethod
    def centered(cls, n: int, h: float, center: Point = (0.0, 0.0), ny: Optional[int] = None) -> "Grid2D":
        """중앙이 center 에 오는 격자"""
        ny = n if ny is None else ny
        origin = (center[0] - (n - 1) / 2 * h, center[1] - (ny - 1) / 2 * h)
        return cls(n, ny, h, origin)

    @classmethod
    def covering(cls, extent: float, n: int, margin: int = 2) -> "Grid2D":
        """
        반폭 extent 인 도형을 덮는 n×n 중앙 정렬 격자

        Args:
            extent: 도형의 반폭 (길이 단위)
            n: 축당 셀 수
            margin: 도형 바깥에 남길 셀 수 (테두리 포함)
        """
        if n - 2 * margin < 1:
            raise DomainParameterError(f"셀 수가 너무 적습니다: n={n}, margin={margin}")
        return cls.centered(n, 2.0 * extent / (n - 2 * margin))

    @classmethod
    def unit_square(cls, n_interior: int) -> "Grid2D":
        """[0,1]² 단위 정사각형: 내부 셀 n_interior², 경계 셀 중심이 변 위에 놓인다"""
        return cls(n_interior + 2, n_interior + 2, 1.0 / (n_interior + 1), (0.0, 0.0))

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def middle(self) -> Point:
        return (self.origin[0] + (self.nx - 1) / 2 * self.h,
                self.origin[1] + (self.ny - 1) / 2 * self.h)

    def center_of(self, cell: CellIndex) -> Point:
        return (self.origin[0] + cell.i * self.h, self.origin[1] + cell.j * self.h)

    def contains(self, cell: CellIndex) -> bool:
        return 0 <= cell.i < self.nx and 0 <= cell.j < self.ny

    def linear(self, cell: CellIndex) -> int:
        return cell.j * self.nx + cell.i

    def cell(self, k: int) -> CellIndex:
        return CellIndex(int(k) % self.nx, int(k) // self.nx)

    def offsets(self, center: Optional[Point] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        셀 중심에서 center 까지의 (dx, dy) 배열, shape (ny, nx)

        center 가 None 이면 격자 중앙 기준이며 반인덱스 단위로 계산하므로
        축/대각 반사에 대해 정확히 대칭이다.
        """
        jj, ii = np.indices((self.ny, self.nx))
        if center is None:
            return (ii - (self.nx - 1) / 2) * self.h, (jj - (self.ny - 1) / 2) * self.h
        return (self.origin[0] + ii * self.h - center[0],
                self.origin[1] + jj * self.h - center[1])

    def level_of(self, half_space: "HalfSpace") -> int:
        """
        ∂H 의 정수 레벨 m: H = {셀 p : 2·d·p < m} (p 는 인덱스 좌표)

        ∂H 가 셀 중심이나 중심 사이 중점을 지나지 않으면 IncompatibleHalfSpaceError.
        """
        d1, d2 = half_space.direction
        norm = math.sqrt(d1 * d1 + d2 * d2)
        raw = 2.0 * (half_space.offset * norm - (d1 * self.origin[0] + d2 * self.origin[1])) / self.h
        level = int(round(raw))
        if abs(raw - level) > _LEVEL_TOL * max(1.0, abs(raw)):
            raise IncompatibleHalfSpaceError(
                f"∂H 가 셀 중심/중점과 맞지 않습니다: direction={half_space.direction}, offset={half_space.offset}")
        if _is_diagonal(half_space.direction) and level % 2:
            raise IncompatibleHalfSpaceError(
                f"대각 반공간은 셀 중심을 지나야 합니다: direction={half_space.direction}, offset={half_space.offset}")
        return level

    def middle_level(self, direction: Direction) -> int:
        """격자 중앙을 지나는 ∂H 의 레벨"""
        return direction[0] * (self.nx - 1) + direction[1] * (self.ny - 1)

    def level_range(self, direction: Direction) -> Tuple[int, int]:
        corners = [2 * (direction[0] * i + direction[1] * j)
                   for i in (0, self.nx - 1) for j in (0, self.ny - 1)]
        return min(corners), max(corners)


@dataclass(frozen=True)
class HalfSpace:
    """열린 반공간 H = {x : x·normal < offset}, normal 은 축 또는 ±45° 방향"""
    direction: Direction
    offset: float

    def __post_init__(self):
        direction = (int(self.direction[0]), int(self.direction[1]))
        if direction not in DIRECTIONS:
            raise IncompatibleHalfSpaceError(f"지원하지 않는 법선 방향: {self.direction}")
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def normal(self) -> Tuple[float, float]:
        u = unit_vector(self.direction)
        return (float(u[0]), float(u[1]))

    @classmethod
    def through(cls, direction: Direction, point: Point) -> "HalfSpace":
        u = unit_vector(direction)
        return cls(direction, float(u[0] * point[0] + u[1] * point[1]))

    @classmethod
    def at_level(cls, grid: Grid2D, direction: Direction, level: int) -> "HalfSpace":
        d1, d2 = direction
        offset = (d1 * grid.origin[0] + d2 * grid.origin[1] + level * grid.h / 2) / math.sqrt(d1 * d1 + d2 * d2)
        return cls(direction, offset)

    def complement(self) -> "HalfSpace":
        """닫힘의 여집합 H̄^c (역시 열린 반공간)"""
        return HalfSpace((-self.direction[0], -self.direction[1]), -self.offset)

    def contains(self, point: Point) -> bool:
        u = self.normal
        return u[0] * point[0] + u[1] * point[1] < self.offset


@dataclass(frozen=True)
class ReflectionMap:
    """셀별 위치 (-1: H, 0: ∂H, +1: H̄^c) 와 거울 셀의 선형 인덱스 (-1: 격자 밖)"""
    side: np.ndarray
    mirror: np.ndarray


@lru_cache(maxsize=512)
def reflection_map(grid: Grid2D, half_space: HalfSpace) -> ReflectionMap:
    level = grid.level_of(half_space)
    d1, d2 = half_space.direction
    jj, ii = np.indices((grid.ny, grid.nx))
    twice = 2 * (d1 * ii + d2 * jj) - level
    shift = twice if d1 * d1 + d2 * d2 == 1 else twice // 2
    mi = ii - shift * d1
    mj = jj - shift * d2
    valid = (mi >= 0) & (mi < grid.nx) & (mj >= 0) & (mj < grid.ny)
    side = np.sign(twice).astype(np.int8).ravel()
    mirror = np.where(valid, mj * grid.nx + mi, -1).astype(np.int64).ravel()
    side.setflags(write=False)
    mirror.setflags(write=False)
    return ReflectionMap(side, mirror)


def _clear_border(inside: np.ndarray) -> np.ndarray:
    inside = inside.copy()
    inside[0, :] = inside[-1, :] = False
    inside[:, 0] = inside[:, -1] = False
    return inside


class DomainMask:
    """격자 위 내부 셀 집합 Ω. 테두리 셀은 항상 외부 (5점 스텐실 이웃 보장)"""

    def __init__(self, grid: Grid2D, inside: np.ndarray):
        inside = np.array(inside, dtype=bool)
        if inside.shape != (grid.ny, grid.nx):
            raise MaskError(f"마스크 크기 {inside.shape} 가 격자 {(grid.ny, grid.nx)} 와 다릅니다")
        if not inside.any():
            raise EmptyMaskError("내부 셀이 하나도 없습니다")
        if inside[0, :].any() or inside[-1, :].any() or inside[:, 0].any() or inside[:, -1].any():
            raise MaskError("테두리 셀은 내부일 수 없습니다 (스텐실 이웃이 격자 밖)")
        inside.setflags(write=False)
        self.grid = grid
        self.inside = inside

    def __eq__(self, other):
        if not isinstance(other, DomainMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.inside, other.inside)

    __hash__ = None

    def __repr__(self):
        return f"DomainMask({self.grid.nx}×{self.grid.ny}, cells={self.count})"

    @cached_property
    def interior_indices(self) -> np.ndarray:
        idx = np.flatnonzero(self.inside.ravel())
        idx.setflags(write=False)
        return idx

    @property
    def count(self) -> int:
        return int(self.interior_indices.size)

    def interior_cells(self) -> List[CellIndex]:
        return [self.grid.cell(k) for k in self.interior_indices]

    def is_interior(self, cell: CellIndex) -> bool:
        return self.grid.contains(cell) and bool(self.inside[cell.j, cell.i])

    def offsets(self, center: Optional[Point] = None) -> Tuple[np.ndarray, np.ndarray]:
        """내부 셀들의 (dx, dy), 선형 인덱스 순서"""
        dx, dy = self.grid.offsets(center)
        return dx.ravel()[self.interior_indices], dy.ravel()[self.interior_indices]


# --- 도메인 생성 ---

def make_disk_mask(grid: Grid2D, center: Optional[Point], R: float) -> DomainMask:
    """
    원판 마스크: |중심(c) − center| < R 인 셀

    Args:
        grid: 격자
        center: 원판 중심 (None 이면 격자 중앙)
        R: 반지름
    """
    if not R > 0:
        raise DomainParameterError(f"반지름은 양수여야 합니다: R={R}")
    dx, dy = grid.offsets(center)
    inside = _clear_border(dx * dx + dy * dy < R * R)
    if not inside.any():
        raise EmptyMaskError(f"반지름 R={R} 가 격자 간격 h={grid.h} 에 비해 너무 작습니다")
    return DomainMask(grid, inside)


def make_annulus_mask(grid: Grid2D, R: float, r: float, t: float, center: Optional[Point] = None) -> DomainMask:
    """Ω_{R,r} = B_R(0) \\ B̄_r(t·e1), 바깥 원의 중심은 격자 중앙"""
    if not (0 < r < R):
        raise DomainParameterError(f"0 < r < R 이어야 합니다: R={R}, r={r}")
    if not (0 <= t < R - r):
        raise DomainParameterError(f"0 ≤ t < R − r 이어야 합니다: R={R}, r={r}, t={t}")
    dx, dy = grid.offsets(center)
    hx = dx - t
    inside = _clear_border((dx * dx + dy * dy < R * R) & (hx * hx + dy * dy > r * r))
    if not inside.any():
        raise EmptyMaskError("고리 영역에 내부 셀이 없습니다")
    return DomainMask(grid, inside)


def _require_fits(grid: Grid2D, half_x: float, half_y: float):
    if half_x >= (grid.nx - 1) / 2 * grid.h or half_y >= (grid.ny - 1) / 2 * grid.h:
        raise ShapeOutsideGridError(
            f"도형 (반폭 {half_x:g}×{half_y:g}) 이 격자 밖으로 나갑니다")


def make_steiner_mask(grid: Grid2D, kind: str, **params: float) -> DomainMask:
    """
    수평 중앙선에 대해 Steiner 대칭인 도메인 (Ω = Ω^#)

    Args:
        kind: 'rectangle' (width, height) | 'stadium' (length, radius) | 'ellipse' (a, b)
        params: 도형 파라미터 (모두 양수)
    """
    required = {
        "rectangle": ("width", "height"),
        "stadium": ("length", "radius"),
        "ellipse": ("a", "b"),
    }
    if kind not in required:
        raise DomainParameterError(f"지원하지 않는 Steiner 도형: {kind}")
    missing = [name for name in required[kind] if name not in params]
    if missing:
        raise DomainParameterError(f"{kind} 파라미터 누락: {', '.join(missing)}")
    values = [float(params[name]) for name in required[kind]]
    if any(not v > 0 for v in values):
        raise DomainParameterError(f"{kind} 파라미터는 양수여야 합니다: {dict(zip(required[kind], values))}")

    dx, dy = grid.offsets()
    if kind == "rectangle":
        width, height = values
        _require_fits(grid, width / 2, height / 2)
        inside = (np.abs(dx) < width / 2) & (np.abs(dy) < height / 2)
    elif kind == "stadium":
        length, radius = values
        _require_fits(grid, length + radius, radius)
        ex = np.maximum(np.abs(dx) - length, 0.0)
        inside = ex * ex + dy * dy < radius * radius
    else:
        a, b = values
        _require_fits(grid, a, b)
        inside = (dx / a) ** 2 + (dy / b) ** 2 < 1.0

    if not inside.any():
        raise EmptyMaskError(f"{kind} 도형에 내부 셀이 없습니다")
    mask = DomainMask(grid, _clear_border(inside))
    if not is_steiner_mask(mask):
        raise MaskError(f"{kind} 마스크가 Steiner 대칭이 아닙니다")
    return mask


def make_dumbbell_mask(grid: Grid2D, R: float, neck: float, separation: float) -> DomainMask:
    """(±separation/2, 0) 에 중심을 둔 두 원판을 폭 neck 의 막대로 연결한 아령 도메인"""
    if not (R > 0 and neck > 0 and separation > 0):
        raise DomainParameterError(f"아령 파라미터는 양수여야 합니다: R={R}, neck={neck}, separation={separation}")
    if not neck / 2 < R:
        raise DomainParameterError(f"목 폭이 원판보다 넓습니다: neck={neck}, R={R}")
    _require_fits(grid, separation / 2 + R, R)
    dx, dy = grid.offsets()
    s = separation / 2
    left = (dx + s) ** 2 + dy * dy < R * R
    right = (dx - s) ** 2 + dy * dy < R * R
    bar = (np.abs(dx) <= s) & (np.abs(dy) < neck / 2)
    return DomainMask(grid, _clear_border(left | right | bar))


def make_box_mask(grid: Grid2D) -> DomainMask:
    """테두리를 제외한 모든 셀이 내부인 마스크 (단위 정사각형 실험용)"""
    return DomainMask(grid, _clear_border(np.ones((grid.ny, grid.nx), dtype=bool)))


def is_steiner_mask(mask: DomainMask) -> bool:
    """모든 열이 격자 수평 중앙선에 대해 대칭인 연속 구간인지"""
    ny = mask.grid.ny
    for column in mask.inside.T:
        rows = np.flatnonzero(column)
        if rows.size == 0:
            continue
        if rows[-1] - rows[0] + 1 != rows.size or rows[0] + rows[-1] != ny - 1:
            return False
    return True


# --- 반사와 편광된 도메인 ---

def reflect_cell(half_space: HalfSpace, cell: CellIndex, grid: Grid2D) -> Optional[CellIndex]:
    """σ_H(중심(c)) 에 놓인 셀, 격자를 벗어나면 None"""
    if not grid.contains(cell):
        raise DomainParameterError(f"격자 밖의 셀: {cell}")
    k = reflection_map(grid, half_space).mirror[grid.linear(cell)]
    return None if k < 0 else grid.cell(k)


def _polarized_inside(mask: DomainMask, half_space: HalfSpace) -> Tuple[np.ndarray, bool]:
    rmap = reflection_map(mask.grid, half_space)
    inside = mask.inside.ravel()
    valid = rmap.mirror >= 0
    mirrored = np.zeros_like(inside)
    mirrored[valid] = inside[rmap.mirror[valid]]
    polarized = np.where(rmap.side < 0, inside | mirrored,
                         np.where(rmap.side > 0, inside & mirrored, inside))
    # H̄^c 의 내부 셀 중 거울이 격자 밖인 것: 그 거울점은 Ω_H 에 속하지만 표현할 수 없다
    lost = bool(np.any(inside & (rmap.side > 0) & ~valid))
    return polarized.reshape(mask.inside.shape), lost


def polarize_domain(mask: DomainMask, half_space: HalfSpace) -> DomainMask:
    """Ω_H = ((Ω ∪ σ_H(Ω)) ∩ H) ∪ (Ω ∩ σ_H(Ω)) 의 셀별 평가"""
    polarized, lost = _polarized_inside(mask, half_space)
    if lost or polarized[0, :].any() or polarized[-1, :].any() or polarized[:, 0].any() or polarized[:, -1].any():
        raise PolarizationOutOfGridError("편광된 도메인이 격자를 벗어납니다")
    return DomainMask(mask.grid, polarized)


def is_polarization_invariant(mask: DomainMask, half_space: HalfSpace) -> bool:
    polarized, lost = _polarized_inside(mask, half_space)
    return not lost and np.array_equal(polarized, mask.inside)


def is_reflection_symmetric(mask: DomainMask, half_space: HalfSpace) -> bool:
    """σ_H(Ω) = Ω: 모든 내부 셀의 거울이 내부"""
    mirror = reflection_map(mask.grid, half_space).mirror[mask.interior_indices]
    if np.any(mirror < 0):
        return False
    return bool(np.all(mask.inside.ravel()[mirror]))


def is_radially_symmetric(mask: DomainMask) -> bool:
    """격자 중앙을 지나는 두 축, 두 대각선 반사에 모두 대칭인지"""
    family = half_spaces_through_middle(mask.grid, [E1, E2, DIAGONAL, ANTI_DIAGONAL])
    return len(family) == 4 and all(is_reflection_symmetric(mask, H) for H in family)


# --- 반공간 족 ---

def half_spaces_through_middle(grid: Grid2D, directions: Sequence[Direction] = DIRECTIONS) -> List[HalfSpace]:
    """∂H 가 격자 중앙을 지나는 격자 호환 반공간들"""
    family = []
    for direction in directions:
        level = grid.middle_level(direction)
        if _is_diagonal(direction) and level % 2:
            continue
        family.append(HalfSpace.at_level(grid, direction, level))
    return family


def half_spaces_containing_middle(grid: Grid2D, directions: Sequence[Direction] = DIRECTIONS) -> List[HalfSpace]:
    """격자 중앙을 (열린) 내부에 포함하는 모든 격자 호환 반공간"""
    family = []
    for direction in directions:
        start = grid.middle_level(direction) + 1
        _, top = grid.level_range(direction)
        for level in range(start, top + 1):
            if _is_diagonal(direction) and level % 2:
                continue
            family.append(HalfSpace.at_level(grid, direction, level))
    return family
