#!/usr/bin/env python3
"""
End-to-end test script for NLPF
Runs noise -> filter -> metrics through the library and the CLI
"""
import sys
import os
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cloud_io.cli import main
from cloud_io.files import read_cloud
from evaluation.metrics import evaluate
from filtering.pipeline import FilterParams, filter_cloud
from geometry.cloud import add_gaussian_noise
from geometry.synthetic import generate_demo_models, load_model


def test_library_round():
    """Filter a noisy sphere in memory"""
    print("🧪 Testing filtering library...")
    clean = load_model('sphere', 3000, seed=0)
    noisy = add_gaussian_noise(clean, 0.01, seed=1)
    filtered, report = filter_cloud(noisy, FilterParams(k=40, theta=0.05, iterations=2))

    before, after = evaluate(clean, noisy), evaluate(clean, filtered)
    print(f"   ✅ Noisy    {before.to_line()}")
    print(f"   ✅ Filtered {after.to_line()} in {report.total:.2f}s")
    assert len(filtered) == len(noisy), "Filtering must keep the point count"
    assert after.chamfer < before.chamfer, "Filtering should lower the chamfer distance"


def test_cli_round():
    """Generate demo data, filter it and score it through the CLI"""
    print("\n🧪 Testing command line...")
    with tempfile.TemporaryDirectory() as directory:
        paths = generate_demo_models(directory)
        assert len(paths) == 12, "Three models at four noise states"
        print(f"   ✅ Demo data: {len(paths)} files")

        noisy = os.path.join(directory, 'cube_noise1.0.xyz')
        out = os.path.join(directory, 'cube_filtered.ply')
        code = main(['filter', '--in', noisy, '--out', out, '--k', '40', '--theta', '0.05'])
        assert code == 0, f"filter exited with {code}"
        assert len(read_cloud(out)) == len(read_cloud(noisy))
        print("   ✅ filter command passed")

        code = main(['metrics', '--ref', os.path.join(directory, 'cube.xyz'), '--in', out])
        assert code == 0, f"metrics exited with {code}"
        print("   ✅ metrics command passed")


def run_all_tests():
    """Run all tests"""
    print("=" * 60)
    print("🚀 NLPF Test Suite")
    print("=" * 60)

    tests = [
        ("Filtering library", test_library_round),
        ("Command line", test_cli_round),
    ]

    results = []

    for name, test_func in tests:
        try:
            test_func()
            results.append((name, True))
        except Exception as e:
            print(f"\n❌ {name} failed: {str(e)}")
            results.append((name, False))

    print("\n" + "=" * 60)
    print("📊 Test Results")
    print("=" * 60)

    passed = sum(1 for _, result in results if result)
    total = len(results)

    for name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} - {name}")

    print("=" * 60)
    print(f"Result: {passed}/{total} tests passed")
    print("=" * 60)

    return passed == total


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
