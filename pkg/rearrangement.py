"""
스칼라 필드, 이산 재배열 클래스 E(f₀) 와 극값 재배열 모듈
"""
import hashlib
import math
from collections import Counter
from typing import Iterator, Optional, Tuple

import numpy as np
from more_itertools import distinct_permutations

from errors import InvalidValueError, MaskMismatchError
from geometry import DomainMask


class ScalarField:
    """내부 셀 위의 실수 값 (Ω 밖은 0 으로 확장). 값의 순서는 선형 셀 인덱스 순서"""

    def __init__(self, mask: DomainMask, values):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size != mask.count:
            raise InvalidValueError(f"값 개수 {values.size} 가 내부 셀 수 {mask.count} 와 다릅니다")
        if not np.all(np.isfinite(values)):
            raise InvalidValueError("필드에 NaN 또는 무한대 값이 있습니다")
        values.setflags(write=False)
        self.mask = mask
        self.values = values

    @classmethod
    def constant(cls, mask: DomainMask, c: float) -> "ScalarField":
        return cls(mask, np.full(mask.count, float(c)))

    @classmethod
    def from_grid(cls, mask: DomainMask, array: np.ndarray) -> "ScalarField":
        """(ny, nx) 배열에서 내부 셀 값만 취한다"""
        return cls(mask, np.asarray(array, dtype=float).ravel()[mask.interior_indices])

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.mask, values)

    def zero_extended(self) -> np.ndarray:
        """격자 전체 (선형 인덱스) 로 0 확장한 값"""
        full = np.zeros(self.mask.grid.size)
        full[self.mask.interior_indices] = self.values
        return full

    def to_grid(self) -> np.ndarray:
        return self.zero_extended().reshape(self.mask.grid.ny, self.mask.grid.nx)

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def digest(self) -> str:
        """할당 해시 (트레이스와 사이클 탐지용)"""
        return hashlib.sha1(np.ascontiguousarray(self.values).tobytes()).hexdigest()[:12]

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, ScalarField):
            return NotImplemented
        return same_mask(self.mask, other.mask) and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return f"ScalarField(cells={self.values.size}, min={self.values.min():g}, max={self.values.max():g})"


def same_mask(a: DomainMask, b: DomainMask) -> bool:
    return a is b or a == b


def require_same_mask(a: DomainMask, b: DomainMask):
    if not same_mask(a, b):
        raise MaskMismatchError("두 필드의 마스크가 다릅니다")


class RearrangementClass:
    """E(f₀): 내부 셀 위 sorted_values (비증가) 의 모든 순열"""

    def __init__(self, mask: DomainMask, sorted_values):
        sorted_values = np.array(sorted_values, dtype=float)
        if sorted_values.ndim != 1 or sorted_values.size != mask.count:
            raise InvalidValueError(f"값 개수 {sorted_values.size} 가 내부 셀 수 {mask.count} 와 다릅니다")
        if not np.all(np.isfinite(sorted_values)):
            raise InvalidValueError("재배열 클래스에 NaN 또는 무한대 값이 있습니다")
        if np.any(np.diff(sorted_values) > 0):
            raise InvalidValueError("sorted_values 는 비증가 순서여야 합니다")
        sorted_values.setflags(write=False)
        self.mask = mask
        self.sorted_values = sorted_values

    def __len__(self):
        return self.sorted_values.size

    def __repr__(self):
        return f"RearrangementClass(cells={len(self)}, distinct_values={len(set(self.sorted_values.tolist()))})"

    @property
    def is_singleton(self) -> bool:
        return bool(self.sorted_values[0] == self.sorted_values[-1])

    def member_count(self) -> int:
        """서로 다른 할당의 개수 (다항계수)"""
        total = math.factorial(len(self))
        for multiplicity in Counter(self.sorted_values.tolist()).values():
            total //= math.factorial(multiplicity)
        return total

    def members(self) -> Iterator[ScalarField]:
        """모든 서로 다른 멤버 (작은 인스턴스 전수 탐색용)"""
        for values in distinct_permutations(self.sorted_values.tolist()):
            yield ScalarField(self.mask, values)

    def random_member(self, rng: np.random.Generator) -> ScalarField:
        return ScalarField(self.mask, rng.permutation(self.sorted_values))

    def sorted_order_member(self) -> ScalarField:
        """선형 셀 인덱스 순서로 큰 값부터 놓은 멤버"""
        return ScalarField(self.mask, self.sorted_values)

    def contains(self, f: ScalarField) -> bool:
        require_same_mask(self.mask, f.mask)
        return bool(np.array_equal(np.sort(f.values)[::-1], self.sorted_values))


def class_of(f0: ScalarField) -> RearrangementClass:
    return RearrangementClass(f0.mask, np.sort(f0.values)[::-1])


def is_rearrangement(f: ScalarField, g: ScalarField) -> bool:
    """정렬된 값 다중집합이 비트 단위로 같은지"""
    require_same_mask(f.mask, g.mask)
    return bool(np.array_equal(np.sort(f.values), np.sort(g.values)))


def pairing(f: ScalarField, h: ScalarField) -> float:
    """Σ_cells f·h"""
    require_same_mask(f.mask, h.mask)
    return float(np.dot(f.values, h.values))


def _assign(cls: RearrangementClass, keys: np.ndarray) -> ScalarField:
    # keys 오름차순, 동률은 선형 셀 인덱스 순
    order = np.lexsort((np.arange(keys.size), keys))
    values = np.empty(keys.size)
    values[order] = cls.sorted_values
    return ScalarField(cls.mask, values)


def extremal_max(cls: RearrangementClass, h: ScalarField) -> ScalarField:
    """
    Σ f·h 를 최대화하는 클래스 멤버

    k 번째로 큰 클래스 값을 k 번째로 큰 h 값의 셀에 배정한다.

    Args:
        cls: 재배열 클래스
        h: 고정 프로파일

    Returns:
        최대화 멤버
    """
    require_same_mask(cls.mask, h.mask)
    return _assign(cls, -h.values)


def extremal_min(cls: RearrangementClass, h: ScalarField) -> ScalarField:
    """Σ f·h 를 최소화하는 클래스 멤버 (k 번째로 큰 값 → k 번째로 작은 h)"""
    require_same_mask(cls.mask, h.mask)
    return _assign(cls, h.values)


def split_parts(f: ScalarField) -> Tuple[ScalarField, ScalarField]:
    """(f⁺, f⁻), f = f⁺ − f⁻"""
    v = f.values
    return (f.with_values(np.where(v > 0, v, 0.0)),
            f.with_values(np.where(v < 0, -v, 0.0)))


def brute_force_extremal(cls: RearrangementClass, h: ScalarField, maximize: bool = True) -> Tuple[float, Optional[ScalarField]]:
    """모든 멤버를 나열해 Σ f·h 의 최적값을 찾는다 (오라클)"""
    best_value, best = None, None
    for member in cls.members():
        value = pairing(member, h)
        if best_value is None or (value > best_value if maximize else value < best_value):
            best_value, best = value, member
    return best_value, best
