"""Benchmark the compiled kernel backend against the pure-Python twin.

Runs every hot kernel over a deterministic workload built from the
bundled sample corpus and prints per-call timings plus the speedup of
the compiled extension.  Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import importlib.resources
import random
import time

from corpusforge.filtering import SCRIPT_RANGES
from corpusforge.kernels import backends


def load_workload() -> tuple[list[str], list[tuple[str, str]]]:
    sample = importlib.resources.files("corpusforge") / "sample_data" / "corpus_100.txt"
    lines = [l for l in sample.read_text("utf-8").splitlines() if l.strip()]
    rng = random.Random(7)
    texts = [rng.choice(lines) for _ in range(2000)]
    pairs = [(t, " ".join(reversed(t.split()))) for t in texts]
    return texts, pairs


def bench(fn, calls) -> float:
    """Total wall seconds for one pass over ``calls`` argument tuples."""
    started = time.perf_counter()
    for args in calls:
        fn(*args)
    return time.perf_counter() - started


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5,
                        help="passes per kernel; best pass is reported")
    args = parser.parse_args()

    texts, pairs = load_workload()
    latin = SCRIPT_RANGES["en"]
    workloads = {
        "normalize_for_dedup": [(t,) for t in texts],
        "correct_grammar": [(t,) for t in texts],
        "mock_translate": [(t,) for t in texts],
        "post_edit": pairs,
        "quality_score": pairs,
        "classify_text": [(t, 2, 1000, 150, True, latin, 0.5) for t in texts],
    }

    impls = backends()
    if "cython" not in impls:
        print("compiled extension not importable; nothing to compare")
        return 1

    header = f"{'kernel':<22}{'python':>12}{'cython':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, calls in workloads.items():
        best = {}
        for backend, module in impls.items():
            fn = getattr(module, name)
            best[backend] = min(bench(fn, calls) for _ in range(args.repeat))
        per_call_py = best["python"] / len(calls) * 1e6
        per_call_cy = best["cython"] / len(calls) * 1e6
        speedup = best["python"] / best["cython"]
        print(f"{name:<22}{per_call_py:>10.2f}us{per_call_cy:>10.2f}us{speedup:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
