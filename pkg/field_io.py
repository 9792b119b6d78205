"""
마스크/필드 파일, 트레이스 CSV, PGM 히트맵, 보고서 JSON 입출력 모듈
"""
import csv
import json
import math
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from errors import FileFormatError, LabError
from geometry import DomainMask, Grid2D
from rearrangement import ScalarField, require_same_mask

INTERIOR = "#"
EXTERIOR = "."
TRACE_COLUMNS = ["iter", "lambda", "g_hash", "V_hash", "residual"]

PathLike = Union[str, Path]


# --- 텍스트 형식 ---

def format_mask(mask: DomainMask) -> List[str]:
    """헤더 'nx ny h ox oy' 다음 ny 줄 (위쪽 행 j = ny−1 부터)"""
    grid = mask.grid
    lines = [f"{grid.nx} {grid.ny} {grid.h!r} {grid.origin[0]!r} {grid.origin[1]!r}"]
    for row in mask.inside[::-1]:
        lines.append("".join(INTERIOR if cell else EXTERIOR for cell in row))
    return lines


def parse_mask(lines: List[str], source: str = "<mask>") -> Tuple[DomainMask, int]:
    """
    마스크 블록 해석

    Returns:
        (마스크, 소비한 줄 수)
    """
    if not lines:
        raise FileFormatError(f"{source}: 빈 파일입니다")
    header = lines[0].split()
    if len(header) != 5:
        raise FileFormatError(f"{source}: 헤더는 'nx ny h ox oy' 여야 합니다: {lines[0]!r}")
    try:
        nx, ny = int(header[0]), int(header[1])
        h, ox, oy = (float(x) for x in header[2:])
    except ValueError:
        raise FileFormatError(f"{source}: 헤더 값을 읽을 수 없습니다: {lines[0]!r}")
    rows = [line.strip() for line in lines[1:1 + ny]]
    if len(rows) != ny:
        raise FileFormatError(f"{source}: 마스크 행이 {ny} 개여야 하는데 {len(rows)} 개입니다")
    for row in rows:
        if len(row) != nx or set(row) - {INTERIOR, EXTERIOR}:
            raise FileFormatError(f"{source}: 잘못된 마스크 행: {row!r}")
    inside = np.array([[c == INTERIOR for c in row] for row in reversed(rows)], dtype=bool)
    try:
        mask = DomainMask(Grid2D(nx, ny, h, (ox, oy)), inside)
    except LabError as e:
        raise FileFormatError(f"{source}: {e}")
    return mask, 1 + ny


def format_field(f: ScalarField) -> List[str]:
    """마스크 블록 다음 내부 셀 값 (선형 인덱스 순서, 한 줄에 하나)"""
    return format_mask(f.mask) + [repr(float(v)) for v in f.values]


def parse_field(lines: List[str], source: str = "<field>") -> ScalarField:
    """마스크 블록 다음 공백으로 구분된 값들 (한 줄에 몇 개든 상관없다)"""
    mask, used = parse_mask(lines, source)
    body = " ".join(lines[used:]).split()
    if len(body) != mask.count:
        raise FileFormatError(f"{source}: 값 {len(body)} 개, 내부 셀 {mask.count} 개")
    try:
        values = [float(v) for v in body]
    except ValueError as e:
        raise FileFormatError(f"{source}: 값을 읽을 수 없습니다: {e}")
    try:
        return ScalarField(mask, values)
    except LabError as e:
        raise FileFormatError(f"{source}: {e}")


def _read_lines(path: PathLike) -> List[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileFormatError(f"파일을 읽을 수 없습니다: {path} ({e})")


def read_mask(path: PathLike) -> DomainMask:
    mask, _ = parse_mask(_read_lines(path), str(path))
    return mask


def read_field(path: PathLike, mask: Optional[DomainMask] = None) -> ScalarField:
    """필드 파일 읽기, mask 가 주어지면 같은 마스크인지 확인"""
    f = parse_field(_read_lines(path), str(path))
    if mask is not None:
        require_same_mask(mask, f.mask)
        f = ScalarField(mask, f.values)
    return f


def pgm_lines(f: ScalarField) -> Tuple[List[str], Tuple[float, float]]:
    """
    평문 PGM (P2), 내부 셀 값의 선형 min–max 스케일 0..255, 외부는 0

    Returns:
        (PGM 줄, (하한, 상한))
    """
    lo, hi = float(f.values.min()), float(f.values.max())
    span = hi - lo
    full = np.zeros(f.mask.grid.size)
    scaled = (f.values - lo) / span * 255.0 if span > 0 else np.full(f.values.size, 255.0)
    full[f.mask.interior_indices] = np.rint(scaled)
    image = full.reshape(f.mask.grid.ny, f.mask.grid.nx)[::-1].astype(int)
    lines = ["P2", f"{f.mask.grid.nx} {f.mask.grid.ny}", "255"]
    lines.extend(" ".join(str(v) for v in row) for row in image)
    return lines, (lo, hi)


def _json_safe(value):
    """유한하지 않은 실수는 null 로 (JSON 에 Infinity / NaN 이 없다)"""
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


class ArtifactWriter:
    """실행 결과물을 한 출력 디렉토리에 기록"""

    def __init__(self, output_dir: PathLike = "runs"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def sanitize_name(name: str) -> str:
        """디렉토리 이름에 쓸 수 있는 문자만 남긴다"""
        safe = re.sub(r"[^\w\-]", "_", name.strip())
        safe = re.sub(r"_+", "_", safe).strip("_")
        return safe[:100] or "scenario"

    def path(self, filename: str) -> Path:
        return self.output_dir / filename

    def _write(self, filename: str, lines: Iterable[str]) -> Path:
        target = self.path(filename)
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return target

    def write_mask(self, mask: DomainMask, filename: str = "mask.txt") -> Path:
        return self._write(filename, format_mask(mask))

    def write_field(self, f: ScalarField, filename: str) -> Path:
        return self._write(filename, format_field(f))

    def write_trace(self, records, filename: str = "trace.csv") -> Path:
        """열: iter, lambda, g_hash, V_hash, residual"""
        target = self.path(filename)
        with open(target, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for record in records:
                writer.writerow([record.iteration, repr(record.lam), record.g_hash,
                                 record.V_hash, repr(record.residual)])
        return target

    def write_pgm(self, f: ScalarField, filename: str) -> Tuple[Path, Tuple[float, float]]:
        lines, bounds = pgm_lines(f)
        return self._write(filename, lines), bounds

    def write_report(self, report: Dict[str, object], filename: str = "report.json") -> Path:
        target = self.path(filename)
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(_json_safe(report), handle, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=False)
            handle.write("\n")
        return target
