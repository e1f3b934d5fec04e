"""Run each verification suite and print one line per check."""
import sys
import time

from grassbern.verify import SUITES, run_suite


def main():
    failed = 0
    for name in SUITES:
        t0 = time.perf_counter()
        res = run_suite(name)
        for c in res["checks"]:
            failed += not c["passed"]
            print(f"{name:10s} {'PASS' if c['passed'] else 'FAIL'}  {c['check']}")
        print(f"{name:10s} done in {time.perf_counter() - t0:.1f}s")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
