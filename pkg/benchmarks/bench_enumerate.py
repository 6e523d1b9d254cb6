"""Compare the enumeration scan backends on the built-in model.

Usage: python3 benchmarks/bench_enumerate.py [--repeat N] [--limit N]

The numba backend JIT-compiles on first use; one warm-up scan per backend
runs outside the timed region. When numba is not importable the script
reports numpy numbers only.
"""

import argparse
import statistics
import time

from xrforge import builtin_webxr_model
from xrforge.kernels import backend_name, compiled_for, plan_scan, scan


def time_backend(plan, backend: str, repeat: int, limit: int):
    scan(plan, limit=limit, backend=backend)
    samples = []
    total = 0
    for _ in range(repeat):
        start = time.perf_counter()
        total, _ = scan(plan, limit=limit, backend=backend)
        samples.append(time.perf_counter() - start)
    return total, samples


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timed runs per backend")
    parser.add_argument("--limit", type=int, default=0,
                        help="masks to collect per run (0 = count only)")
    args = parser.parse_args()

    model = builtin_webxr_model()
    plan = plan_scan(compiled_for(model), {})
    candidates = 1 << plan.k
    print(f"model: {len(model.features)} features, {plan.k} free, "
          f"{candidates} candidate masks")

    backends = ["numpy"]
    if backend_name() == "numba":
        backends.insert(0, "numba")
    else:
        print("numba unavailable or disabled; timing numpy only")

    results = {}
    for backend in backends:
        total, samples = time_backend(plan, backend, args.repeat, args.limit)
        best = min(samples)
        results[backend] = best
        print(f"{backend:>6}: best {best * 1e3:8.2f} ms  "
              f"median {statistics.median(samples) * 1e3:8.2f} ms  "
              f"({candidates / best / 1e6:7.1f} M candidates/s, "
              f"{total} valid)")

    if len(results) == 2:
        print(f"speedup: numba is {results['numpy'] / results['numba']:.1f}x "
              f"faster than numpy")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
