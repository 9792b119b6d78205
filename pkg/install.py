#!/usr/bin/env python3
"""
Eigenvalue Optimization Lab 설치 스크립트
가상환경 생성, 의존성 설치, 기본 검사 실행
"""
import os
import platform
import subprocess
import sys
from pathlib import Path

TEST_MODULES = [
    "test_geometry.py",
    "test_rearrangement.py",
    "test_polarization.py",
    "test_symmetrization.py",
    "test_eigensolver.py",
]


def run_command(command, description):
    """명령어 실행"""
    print(f"\n🔧 {description}...")
    try:
        subprocess.run(command, check=True, capture_output=True, text=True)
        print(f"✅ {description} 완료")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ {description} 실패: {e.stderr or e.stdout}")
        return False


def check_python_version():
    version = sys.version_info
    if version < (3, 10):
        print("❌ Python 3.10 이상이 필요합니다.")
        sys.exit(1)
    print(f"✅ Python {version.major}.{version.minor}.{version.micro} 감지됨")


def venv_python() -> str:
    if platform.system().lower() == "windows":
        return str(Path("venv") / "Scripts" / "python")
    return str(Path("venv") / "bin" / "python")


def create_virtual_environment():
    if Path("venv").exists():
        print("✅ 가상환경이 이미 존재합니다.")
        return True
    return run_command([sys.executable, "-m", "venv", "venv"], "가상환경 생성")


def install_python_dependencies():
    python = venv_python()
    if not run_command([python, "-m", "pip", "install", "--upgrade", "pip"], "pip 업그레이드"):
        return False
    return run_command([python, "-m", "pip", "install", "-r", "requirements.txt"], "Python 패키지 설치")


def test_installation():
    """라이브러리 로드와 빠른 테스트 모듈 실행"""
    print("\n🧪 설치 테스트 중...")
    python = venv_python()
    test_code = (
        "import numpy, scipy.sparse.linalg, pydantic, dotenv, tqdm, more_itertools\n"
        "print('✅ 모든 라이브러리 로드 성공!')"
    )
    if not run_command([python, "-c", test_code], "라이브러리 로드"):
        return False
    ok = True
    for module in TEST_MODULES:
        if Path(module).exists() and not run_command([python, module], f"{module} 실행"):
            ok = False
    if not ok:
        print("⚠️  일부 테스트가 실패했습니다. 'pytest -q' 로 자세히 확인하세요.")
    return ok


def show_usage_examples():
    python = venv_python()
    print("\n📖 사용 예시:")
    print("=" * 50)
    print("\n🔬 시나리오 실행:")
    print(f"   {python} cli.py run configs/ball_schwarz.cfg")
    print(f"   {python} cli.py run configs/nonconcentric.cfg --seed 3 -v")
    print("\n🎲 성질 검사 묶음:")
    print(f"   {python} cli.py suite --seed 0")
    print(f"   {python} cli.py suite --counts 20 --results suite.json")
    print("\n🗺️  마스크 생성:")
    print(f"   {python} cli.py mask gen 'annulus:grid=96,R=1,r=0.3,t=0.2' -o annulus.txt")
    print("\n🧪 전체 테스트:")
    print(f"   {python} -m pytest -q")


def main():
    print("🔬 Eigenvalue Optimization Lab 설치")
    print("=" * 60)

    script_dir = os.path.dirname(os.path.abspath(__file__))
    os.chdir(script_dir)
    print(f"📂 작업 디렉토리: {script_dir}")

    check_python_version()
    if not create_virtual_environment():
        print("❌ 가상환경 생성 실패")
        sys.exit(1)
    if not install_python_dependencies():
        print("❌ Python 패키지 설치 실패")
        sys.exit(1)
    if not test_installation():
        print("❌ 설치 테스트 실패")
        sys.exit(1)

    print("\n" + "=" * 60)
    print("🎉 설치 완료!")
    show_usage_examples()
    print("\n💡 환경 변수 (.env):")
    print("  • EIGENLAB_OUT: 결과 디렉토리 루트 (기본: runs)")
    print("  • EIGENLAB_VERBOSE: true 면 반복 진행 출력")


if __name__ == "__main__":
    main()
