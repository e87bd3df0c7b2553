"""
Verify ddenorm Setup
Checks packages, imports and one cheap end-to-end computation
"""

import sys
from pathlib import Path

# Colors for terminal output
GREEN = '\033[92m'
RED = '\033[91m'
YELLOW = '\033[93m'
RESET = '\033[0m'


def print_status(message, success=True):
    """Print colored status message"""
    color = GREEN if success else RED
    symbol = "✓" if success else "✗"
    print(f"{color}{symbol}{RESET} {message}")


def check_environment():
    """Python version and required packages"""
    print("\n" + "=" * 60)
    print("Checking Environment")
    print("=" * 60)

    checks_passed = 0
    checks_total = 1

    py_version = sys.version_info
    if py_version >= (3, 10):
        print_status(f"Python {py_version.major}.{py_version.minor}.{py_version.micro}", success=True)
        checks_passed += 1
    else:
        print_status(f"Python {py_version.major}.{py_version.minor} (requires 3.10+)", success=False)

    for package in ("numpy", "scipy", "sympy", "pandas", "pydantic", "pydantic_settings", "dotenv", "tqdm"):
        checks_total += 1
        try:
            __import__(package)
            print_status(f"Package: {package}", success=True)
            checks_passed += 1
        except ImportError:
            print_status(f"Package: {package} - NOT INSTALLED", success=False)

    return checks_passed, checks_total


def check_imports():
    """Every ddenorm module imports and exposes its entry point"""
    print("\n" + "=" * 60)
    print("Checking Module Imports")
    print("=" * 60)

    tests = [
        ("ddenorm.systems", "get_model"),
        ("ddenorm.spectrum", "rightmost"),
        ("ddenorm.points", "correct_codim2"),
        ("ddenorm.nmfm", "normal_form"),
        ("ddenorm.predictors", "predictors_for"),
        ("ddenorm.continuation", "detect_special_points"),
        ("ddenorm.integrate", "simulate"),
        ("ddenorm.cli", "main"),
    ]
    checks_passed = 0
    for module_name, attr_name in tests:
        try:
            module = __import__(module_name, fromlist=[attr_name])
            getattr(module, attr_name)
            print_status(f"{module_name}.{attr_name}", success=True)
            checks_passed += 1
        except Exception as e:
            print_status(f"{module_name}.{attr_name} - {e}", success=False)

    return checks_passed, len(tests)


def check_configs():
    """Shipped run configurations validate"""
    print("\n" + "=" * 60)
    print("Checking Run Configurations")
    print("=" * 60)

    try:
        from ddenorm.config import load_config
    except ImportError as e:
        print_status(f"ddenorm.config - {e}", success=False)
        return 0, 1

    configs = sorted((Path(__file__).resolve().parent / "configs").glob("*.json"))
    checks_passed = 0
    for path in configs:
        try:
            load_config(str(path))
            print_status(path.name, success=True)
            checks_passed += 1
        except Exception as e:
            print_status(f"{path.name} - {e}", success=False)

    return checks_passed, max(len(configs), 1)


def check_scalar_root():
    """x' = -(pi/2) x(t - 1) has the root i pi/2"""
    print("\n" + "=" * 60)
    print("Checking Spectrum")
    print("=" * 60)

    try:
        import numpy as np

        from ddenorm.model import linearize
        from ddenorm.spectrum import rightmost
        from ddenorm.systems import get_model

        model = get_model("scalar")
        pair = rightmost(linearize(model, np.zeros(1), np.array([np.pi / 2])), 1)[0]
        ok = abs(pair.lam - 1j * np.pi / 2) < 1e-8
        print_status(f"rightmost root {pair.lam:.10f}", success=ok)
        return int(ok), 1
    except Exception as e:
        print_status(f"spectrum - {e}", success=False)
        return 0, 1


def main():
    """Run all checks"""
    print("\n" + "=" * 60)
    print("🔍 ddenorm Setup Verification")
    print("=" * 60)

    total_passed = 0
    total_checks = 0
    for check in (check_environment, check_imports, check_configs, check_scalar_root):
        passed, total = check()
        total_passed += passed
        total_checks += total

    print("\n" + "=" * 60)
    print("Summary")
    print("=" * 60)

    if total_passed == total_checks:
        print(f"{GREEN}✅ All checks passed! ({total_passed}/{total_checks}){RESET}")
        print("\nNext steps:")
        print("  1. ddenorm models")
        print("  2. ddenorm analyze --config configs/fhn_hopf.json --out out/fhn")
        print("  3. ./run_examples.sh")
    else:
        print(f"{RED}❌ Some checks failed ({total_passed}/{total_checks}){RESET}")
        print("\nCommon fixes:")
        print("  - Run from project root")
        print("  - Install the package: pip install -e .[test]")

    print("\n" + "=" * 60)

    return 0 if total_passed == total_checks else 1


if __name__ == "__main__":
    sys.exit(main())
