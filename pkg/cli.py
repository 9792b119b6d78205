#!/usr/bin/env python3
"""
Eigenvalue optimization lab CLI
"""
import argparse
import sys
from pathlib import Path

from errors import ConfigError, LabError, exit_code_for
from field_io import format_mask
from property_suite import run_property_suite
from scenario import VERBOSE, build_mask, load_scenario, parse_scenario, run_scenario


def parse_mask_spec(spec: str) -> dict:
    """'disk:grid=64,R=1' → 시나리오 키 딕셔너리"""
    domain, _, rest = spec.partition(":")
    values = {'domain': domain.strip()}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"'key=value' 형식이 아닙니다: {item!r}")
        values[key.strip()] = value.strip()
    return values


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.config)
    except LabError as e:
        print(f"❌ 설정 오류: {e}")
        return exit_code_for(e)
    result = run_scenario(scenario, output_dir=args.out, seed=args.seed, verbose=args.verbose or VERBOSE)
    return result['exit_code']


def cmd_suite(args) -> int:
    return run_property_suite(seed=args.seed, counts=args.counts, results_path=args.results)


def cmd_mask_gen(args) -> int:
    try:
        mask = build_mask(parse_scenario(parse_mask_spec(args.spec), args.spec))
    except LabError as e:
        print(f"❌ 마스크 생성 실패: {e}", file=sys.stderr)
        return exit_code_for(e)
    text = "\n".join(format_mask(mask)) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"💾 마스크 저장됨: {args.output} (내부 셀 {mask.count})")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='재배열 클래스 위 첫 고유값 최적화 실험')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='시나리오 설정 파일 실행')
    run.add_argument('config', help='key = value 설정 파일')
    run.add_argument('--out', help='결과 디렉토리 (기본: $EIGENLAB_OUT/<name>)')
    run.add_argument('--seed', type=int, help='설정의 seed 대신 쓸 시드')
    run.add_argument('-v', '--verbose', action='store_true', help='반복 진행 출력')
    run.set_defaults(func=cmd_run)

    suite = sub.add_parser('suite', help='무작위 성질 검사 묶음 실행')
    suite.add_argument('--seed', type=int, default=0, help='난수 시드 (기본: 0)')
    suite.add_argument('--counts', type=int, help='묶음별 시행 수 (기본: 묶음별 기본값)')
    suite.add_argument('--results', default='property_suite_results.json', help='결과 JSON 경로')
    suite.set_defaults(func=cmd_suite)

    mask = sub.add_parser('mask', help='마스크 도구')
    mask_sub = mask.add_subparsers(dest='mask_command', required=True)
    gen = mask_sub.add_parser('gen', help="명세로 마스크 파일 생성 (예: 'disk:grid=64,R=1')")
    gen.add_argument('spec', help='도메인:키=값,... 명세')
    gen.add_argument('-o', '--output', help='저장 경로 (기본: 표준 출력)')
    gen.set_defaults(func=cmd_mask_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == '__main__':
    sys.exit(main())
