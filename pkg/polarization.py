"""
편광 (두 점 대칭화) f_H, 쌍대 편광 f^H 와 Hardy-Littlewood 부등식 검사
"""
import warnings
from typing import Tuple

import numpy as np

from errors import NonInvariantMaskError, SignedFieldError, SignedFieldWarning
from geometry import HalfSpace, is_polarization_invariant, reflection_map
from rearrangement import ScalarField, require_same_mask


def _mirror_pairs(f: ScalarField, half_space: HalfSpace) -> Tuple[np.ndarray, np.ndarray]:
    """
    내부 셀별 위치 (-1/0/+1) 와 거울 셀의 0 확장 값

    거울이 외부이거나 격자 밖이면 0 이다.
    """
    mask = f.mask
    if not is_polarization_invariant(mask, half_space):
        raise NonInvariantMaskError(f"마스크가 H={half_space} 에 대해 편광 불변이 아닙니다")
    rmap = reflection_map(mask.grid, half_space)
    side = rmap.side[mask.interior_indices]
    mirror = rmap.mirror[mask.interior_indices]
    extended = f.zero_extended()
    partner = np.where(mirror >= 0, extended[np.maximum(mirror, 0)], 0.0)
    return side, partner


def _flag_signed(f: ScalarField):
    if not f.is_nonnegative():
        warnings.warn("부호가 섞인 필드의 편광은 재배열이 아닐 수 있습니다", SignedFieldWarning, stacklevel=3)


def polarize(f: ScalarField, half_space: HalfSpace) -> ScalarField:
    """
    f_H: H 쪽은 max(f̃(c), f̃(σ_H c)), H̄^c 쪽은 min, ∂H 위는 그대로

    Args:
        f: 편광 불변 마스크 위의 필드 (f ≥ 0 권장)
        half_space: 격자 호환 반공간

    Returns:
        편광된 필드
    """
    _flag_signed(f)
    side, partner = _mirror_pairs(f, half_space)
    own = f.values
    out = np.where(side < 0, np.maximum(own, partner),
                   np.where(side > 0, np.minimum(own, partner), own))
    return f.with_values(out)


def dual_polarize(f: ScalarField, half_space: HalfSpace) -> ScalarField:
    """f^H = f̃_H ∘ σ_H (거울이 Ω 밖이어도 0 확장의 편광을 그 점에서 평가)"""
    _flag_signed(f)
    side, partner = _mirror_pairs(f, half_space)
    own = f.values
    out = np.where(side < 0, np.minimum(own, partner),
                   np.where(side > 0, np.maximum(own, partner), own))
    return f.with_values(out)


def _pair_gap(v: ScalarField, w: ScalarField, half_space: HalfSpace, concordant: bool) -> float:
    # H 쪽 셀마다 (거울 쌍 하나씩) |Δv|·|Δw| 를 더한다. 거울이 외부면 값 0 인 가상 셀과 짝짓는다
    side_v, partner_v = _mirror_pairs(v, half_space)
    _, partner_w = _mirror_pairs(w, half_space)
    in_h = side_v < 0
    dv = v.values[in_h] - partner_v[in_h]
    dw = w.values[in_h] - partner_w[in_h]
    selected = dv * dw > 0 if concordant else dv * dw < 0
    return float(np.sum(np.abs(dv[selected]) * np.abs(dw[selected])))


def hardy_littlewood_gap(v: ScalarField, w: ScalarField, half_space: HalfSpace) -> float:
    """
    Σ v_H·w_H − Σ v·w (≥ 0)

    거울 쌍마다 인수분해된 형태로 누적하므로 부호가 정확하다.
    """
    require_same_mask(v.mask, w.mask)
    if not (v.is_nonnegative() or w.is_nonnegative()):
        raise SignedFieldError("Hardy-Littlewood: v, w 중 하나는 음이 아니어야 합니다")
    return _pair_gap(v, w, half_space, concordant=False)


def reverse_hl_gap(v: ScalarField, w: ScalarField, half_space: HalfSpace) -> float:
    """Σ v·w − Σ v^H·w_H (≥ 0), w ≥ 0"""
    require_same_mask(v.mask, w.mask)
    if not w.is_nonnegative():
        raise SignedFieldError("역 Hardy-Littlewood: w 는 음이 아니어야 합니다")
    return _pair_gap(v, w, half_space, concordant=True)


def dirichlet_energy(f: ScalarField) -> float:
    """
    이산 디리클레 에너지 Σ_links (Δf)², 마스크 밖은 0

    h² 스케일이 상쇄되어 격자 간격과 무관하다. φᵀ(−Δ_h)φ = dirichlet_energy(φ) / h².
    """
    grid = f.to_grid()
    horizontal = np.diff(grid, axis=1)
    vertical = np.diff(grid, axis=0)
    return float(np.sum(horizontal * horizontal) + np.sum(vertical * vertical))
