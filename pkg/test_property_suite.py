#!/usr/bin/env python3
"""
Randomized property suite tests
"""
import json
import tempfile
from pathlib import Path

import numpy as np

from polarization import polarize
from property_suite import DEFAULT_COUNTS, PropertySuite, run_property_suite
from test_geometry import run_tests


def rolled_polarize(f, H):
    """값을 한 칸 밀어버리는 잘못된 편광"""
    return f.with_values(np.roll(polarize(f, H).values, 1))


def test_small_suite_passes(tmp_path: Path):
    results_path = tmp_path / "suite.json"
    assert run_property_suite(seed=0, counts=3, results_path=str(results_path), progress=False) == 0
    results = json.loads(results_path.read_text(encoding="utf-8"))
    assert set(results['batteries']) == set(DEFAULT_COUNTS)
    assert results['failed'] == []
    assert results['score'] == 100.0


def test_zero_trials_only_warn():
    assert run_property_suite(seed=0, counts=0, results_path=None, progress=False) == 0
    results = PropertySuite(seed=0, counts=0, progress=False).run_all()
    assert len(results['warnings']) == len(DEFAULT_COUNTS)
    assert all(row['trials'] == 0 for row in results['batteries'].values())


def test_corrupted_polarization_is_caught():
    suite = PropertySuite(seed=1, counts=5, polarize_fn=rolled_polarize, progress=False)
    results = suite.run_all()
    assert results['batteries']['hardy_littlewood']['failures'] > 0
    assert results['failed']
    assert run_property_suite(seed=1, counts=5, results_path=None, polarize_fn=rolled_polarize,
                              progress=False) == 1


def test_reverse_battery_checks_identity():
    # 부호가 섞인 v 로도 간극과 직접 계산이 일치해야 한다
    clean = PropertySuite(seed=4, counts=40, progress=False).run_all()
    assert clean['batteries']['reverse_hardy_littlewood']['failures'] == 0
    broken = PropertySuite(seed=4, counts=40, polarize_fn=rolled_polarize, progress=False).run_all()
    assert broken['batteries']['reverse_hardy_littlewood']['failures'] > 0


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tests = [
            ("small suite", lambda: test_small_suite_passes(Path(tmp))),
            ("zero trials", test_zero_trials_only_warn),
            ("corrupted polarization", test_corrupted_polarization_is_caught),
            ("reverse identity", test_reverse_battery_checks_identity),
        ]
        return run_tests("Property Suite", tests)


if __name__ == "__main__":
    raise SystemExit(main())
