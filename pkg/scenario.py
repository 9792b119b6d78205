"""
시나리오 설정 (key = value 파일) 해석과 실행 모듈
"""
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from eigensolver import SolverOptions
from errors import ConfigError, LabError, exit_code_for
from field_io import ArtifactWriter, read_field, read_mask
from geometry import (
    DomainMask,
    Grid2D,
    make_annulus_mask,
    make_box_mask,
    make_disk_mask,
    make_dumbbell_mask,
    make_steiner_mask,
)
from optimizer import OptProblem, OptTrace, optimize, symmetry_report
from rearrangement import ScalarField

load_dotenv()

DEFAULT_OUTPUT_ROOT = os.getenv("EIGENLAB_OUT", "runs")
VERBOSE = os.getenv("EIGENLAB_VERBOSE", "false").lower() == "true"

STEINER_PARAMS = {
    "rectangle": ("width", "height"),
    "stadium": ("length", "radius"),
    "ellipse": ("a", "b"),
}


class Scenario(BaseModel):
    """시나리오 설정. 모르는 키는 거부한다"""
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    domain: Literal["disk", "annulus", "steiner", "box", "dumbbell", "mask"]
    grid: int = 64
    R: Optional[float] = None
    r: Optional[float] = None
    t: float = 0.0
    kind: Optional[Literal["rectangle", "stadium", "ellipse"]] = None
    a: Optional[float] = None
    b: Optional[float] = None
    length: Optional[float] = None
    radius: Optional[float] = None
    width: Optional[float] = None
    height: Optional[float] = None
    separation: Optional[float] = None
    neck: Optional[float] = None
    mask_file: Optional[str] = None
    g0: str = "constant:1"
    V0: str = "constant:0"
    direction: Literal["minimize", "maximize"] = "minimize"
    tol: float = 1e-10
    tol_lambda: Optional[float] = None
    max_iters: int = 200
    seed: int = 0
    repeat_seeds: int = 1
    shuffle_start: bool = False
    heatmaps: bool = True

    # 실행 후 검사
    expect_iterations: Optional[int] = None
    max_schwarz_defect: Optional[float] = None
    max_steiner_defect: Optional[float] = None
    max_foliated_defect: Optional[float] = None
    expect_argmax_in_L: Optional[bool] = None
    max_ball_mismatch: Optional[float] = None
    max_lambda_spread: Optional[float] = None
    expect_same_g: Optional[bool] = None

    @model_validator(mode="after")
    def _check_domain_params(self):
        if self.grid < 5:
            raise ValueError(f"grid 는 5 이상이어야 합니다: {self.grid}")
        if self.max_iters < 1 or self.repeat_seeds < 1:
            raise ValueError("max_iters 와 repeat_seeds 는 1 이상이어야 합니다")
        if not self.tol > 0:
            raise ValueError(f"tol 은 양수여야 합니다: {self.tol}")
        needed = {
            "disk": ["R"],
            "annulus": ["R", "r"],
            "steiner": ["kind"] + list(STEINER_PARAMS.get(self.kind or "", ())),
            "box": [],
            "dumbbell": ["R", "neck", "separation"],
            "mask": ["mask_file"],
        }[self.domain]
        missing = [key for key in needed if getattr(self, key) is None]
        if missing:
            raise ValueError(f"domain={self.domain} 에 필요한 키가 없습니다: {', '.join(missing)}")
        return self


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    key = value 설정 파일 읽기

    Args:
        path: 설정 파일 경로

    Returns:
        검증된 Scenario
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"설정 파일이 없습니다: {path}")
    raw = dotenv_values(path)
    blank = [key for key, value in raw.items() if value is None]
    if blank:
        raise ConfigError(f"{path}: 값이 없는 키: {', '.join(blank)}")
    values: Dict[str, Any] = dict(raw)
    values.setdefault("name", path.stem)
    # 상대 경로는 설정 파일 위치 기준
    if values.get("mask_file") and not Path(values["mask_file"]).is_absolute():
        values["mask_file"] = str(path.parent / values["mask_file"])
    return parse_scenario(values, str(path))


def parse_scenario(values: Dict[str, Any], source: str = "<config>") -> Scenario:
    try:
        return Scenario(**values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                             for err in e.errors())
        raise ConfigError(f"{source}: {problems}")


def build_mask(scenario: Scenario) -> DomainMask:
    n = scenario.grid
    if scenario.domain == "disk":
        return make_disk_mask(Grid2D.covering(scenario.R, n), None, scenario.R)
    if scenario.domain == "annulus":
        return make_annulus_mask(Grid2D.covering(scenario.R, n), scenario.R, scenario.r, scenario.t)
    if scenario.domain == "steiner":
        params = {key: getattr(scenario, key) for key in STEINER_PARAMS[scenario.kind]}
        if scenario.kind == "rectangle":
            extent = max(params["width"], params["height"]) / 2
        elif scenario.kind == "stadium":
            extent = params["length"] + params["radius"]
        else:
            extent = max(params["a"], params["b"])
        return make_steiner_mask(Grid2D.covering(extent, n), scenario.kind, **params)
    if scenario.domain == "dumbbell":
        extent = scenario.separation / 2 + scenario.R
        return make_dumbbell_mask(Grid2D.covering(extent, n), scenario.R, scenario.neck, scenario.separation)
    if scenario.domain == "box":
        return make_box_mask(Grid2D.unit_square(n - 2))
    return read_mask(scenario.mask_file)


def parse_profile(spec: str, mask: DomainMask) -> ScalarField:
    """
    프로파일 명세를 필드로 변환

    constant:c, chi:fraction[:value], radial:c0:c1, file:path
    """
    kind, _, rest = spec.strip().partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "constant" and len(parts) == 1:
            return ScalarField.constant(mask, float(parts[0]))
        if kind == "chi" and len(parts) in (1, 2):
            fraction = float(parts[0])
            value = float(parts[1]) if len(parts) == 2 else 1.0
            if not 0 < fraction <= 1:
                raise ConfigError(f"chi 비율은 (0, 1] 이어야 합니다: {fraction}")
            count = math.ceil(round(fraction * mask.count, 9))
            values = np.zeros(mask.count)
            values[:count] = value
            return ScalarField(mask, values)
        if kind == "radial" and len(parts) == 2:
            dx, dy = mask.offsets()
            return ScalarField(mask, float(parts[0]) + float(parts[1]) * np.sqrt(dx * dx + dy * dy))
        if kind == "file" and rest:
            return read_field(rest, mask)
    except ValueError as e:
        raise ConfigError(f"프로파일 값을 읽을 수 없습니다: {spec!r} ({e})")
    raise ConfigError(f"알 수 없는 프로파일 명세: {spec!r}")


def check_expectations(scenario: Scenario, report: Dict[str, Any]) -> List[str]:
    """설정의 검사 항목과 보고서를 비교해 실패 목록을 돌려준다"""
    failures = []

    def bound(key: str, fields: List[str]):
        limit = getattr(scenario, key)
        if limit is None:
            return
        present = [f for f in fields if f in report]
        if not present:
            failures.append(f"{key}: 보고서에 {fields[0]} 항목이 없습니다")
        for f in present:
            if not report[f] <= limit:
                failures.append(f"{f} = {report[f]:.4g} > {key} = {limit:g}")

    if scenario.expect_iterations is not None and report['iterations'] != scenario.expect_iterations:
        failures.append(f"iterations = {report['iterations']} ≠ {scenario.expect_iterations}")
    bound("max_schwarz_defect", ["schwarz_defect_phi"])
    bound("max_steiner_defect", ["steiner_defect_phi", "steiner_defect_g"])
    bound("max_foliated_defect", ["foliated_defect_phi", "foliated_defect_g", "foliated_defect_V"])
    bound("max_ball_mismatch", ["ball_mismatch"])
    bound("max_lambda_spread", ["lambda_spread"])
    if scenario.expect_argmax_in_L is not None and report.get('argmax_in_L_Omega') != scenario.expect_argmax_in_L:
        failures.append(f"argmax_in_L_Omega = {report.get('argmax_in_L_Omega')} ≠ {scenario.expect_argmax_in_L}")
    if scenario.expect_same_g is not None and report.get('same_g') != scenario.expect_same_g:
        failures.append(f"same_g = {report.get('same_g')} ≠ {scenario.expect_same_g}")
    return failures


def _write_artifacts(writer: ArtifactWriter, scenario: Scenario, trace: OptTrace, report: Dict[str, Any]):
    writer.write_trace(trace.records)
    writer.write_field(trace.phi, "phi.field")
    writer.write_field(trace.g, "g.field")
    writer.write_field(trace.V, "v.field")
    if scenario.heatmaps:
        bounds = {}
        for label, f in (("phi", trace.phi), ("g", trace.g), ("v", trace.V)):
            _, (lo, hi) = writer.write_pgm(f, f"{label}.pgm")
            bounds[label] = [lo, hi]
        report['heatmap_bounds'] = bounds
    writer.write_report(report)


def run_scenario(scenario: Scenario, output_dir: Optional[Union[str, Path]] = None,
                 seed: Optional[int] = None, verbose: bool = VERBOSE) -> Dict[str, Any]:
    """
    시나리오 실행: 최적화, 대칭 보고서, 결과물 기록, 검사

    Args:
        scenario: 검증된 설정
        output_dir: 결과 디렉토리 (기본: $EIGENLAB_OUT/<name>)
        seed: 설정의 seed 대신 쓸 시드
        verbose: 반복 진행 출력

    Returns:
        {'success', 'exit_code', 'report', 'failures', 'output_dir'} (실패 시 'error')
    """
    base_seed = scenario.seed if seed is None else seed
    target = Path(output_dir) if output_dir else Path(DEFAULT_OUTPUT_ROOT) / ArtifactWriter.sanitize_name(scenario.name)
    try:
        mask = build_mask(scenario)
        g0 = parse_profile(scenario.g0, mask)
        V0 = parse_profile(scenario.V0, mask)
        print(f"🔍 {scenario.name}: {scenario.domain}, 내부 셀 {mask.count}, {scenario.direction}")

        traces = []
        for k in range(scenario.repeat_seeds):
            run_seed = base_seed + k
            problem = OptProblem.from_fields(
                g0, V0,
                direction=scenario.direction,
                tol_lambda=scenario.tol_lambda,
                max_iters=scenario.max_iters,
                seed=run_seed,
                shuffle_start=scenario.shuffle_start,
                solver=SolverOptions(tol=scenario.tol, seed=run_seed),
            )
            traces.append(optimize(problem, verbose=verbose))

        trace = traces[0]
        report = symmetry_report(trace, scenario)
        report['name'] = scenario.name
        report['seed'] = base_seed
        report['mask_cells'] = mask.count
        report['lambda_initial'] = trace.records[0].lam
        if len(traces) > 1:
            lambdas = [tr.lam for tr in traces]
            report['seed_lambdas'] = lambdas
            report['lambda_spread'] = (max(lambdas) - min(lambdas)) / max(abs(x) for x in lambdas)
            report['same_g'] = len({tr.g.digest() for tr in traces}) == 1

        failures = check_expectations(scenario, report)
        report['failures'] = failures
        writer = ArtifactWriter(target)
        _write_artifacts(writer, scenario, trace, report)
        print(f"💾 결과 저장됨: {writer.output_dir}")
    except LabError as e:
        print(f"❌ {scenario.name} 실패: {e}")
        return {'success': False, 'exit_code': exit_code_for(e), 'error': str(e), 'output_dir': str(target)}

    if failures:
        for failure in failures:
            print(f"   ❌ {failure}")
    else:
        print(f"✅ {scenario.name}: Λ* = {trace.lam:.10g} ({trace.status}, 풀이 {trace.iterations} 회)")
    return {
        'success': not failures,
        'exit_code': 1 if failures else 0,
        'report': report,
        'failures': failures,
        'output_dir': str(target),
    }
